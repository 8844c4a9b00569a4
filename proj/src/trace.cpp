#include <crrn/trace.hpp>

#include <json.hpp>

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace crrn {

const char *const kTraceHeader =
    "iter,f,grad_norm,step_norm,lambda_star,model_decrease,actual_decrease,"
    "descent_rhs,subsolver_iters,wall_ns";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream &out, const std::vector<IterationRecord> &r) {
  out << kTraceHeader << '\n';
  for (const auto &rec : r) {
    out << rec.k << ',' << format_double(rec.f) << ','
        << format_double(rec.grad_norm) << ',' << format_double(rec.step_norm)
        << ',' << format_double(rec.lambda_star) << ','
        << format_double(rec.model_decrease) << ','
        << format_double(rec.actual_decrease) << ','
        << format_double(rec.descent_rhs) << ',' << rec.subsolver_iters << ','
        << rec.wall_ns << '\n';
  }
}

void write_trace_jsonl(std::ostream &out,
                       const std::vector<IterationRecord> &records,
                       const std::optional<StationarityReport> &report) {
  for (const auto &r : records) {
    nlohmann::ordered_json j;
    j["iter"] = r.k;
    j["f"] = r.f;
    j["grad_norm"] = r.grad_norm;
    j["step_norm"] = r.step_norm;
    j["lambda_star"] = r.lambda_star;
    j["model_decrease"] = r.model_decrease;
    j["actual_decrease"] = r.actual_decrease;
    j["descent_rhs"] = r.descent_rhs;
    j["subsolver_iters"] = r.subsolver_iters;
    j["wall_ns"] = r.wall_ns;
    out << j.dump() << '\n';
  }
  if (report) {
    nlohmann::ordered_json j;
    j["certification"] = {{"epsilon", report->epsilon},
                          {"grad_norm", report->grad_norm},
                          {"lambda_min", report->lambda_min},
                          {"lambda_threshold", report->lambda_threshold},
                          {"first_order", report->first_order},
                          {"second_order", report->second_order}};
    out << j.dump() << '\n';
  }
}

std::vector<IterationRecord> read_trace_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw ParseError("trace: unexpected header");
  std::vector<IterationRecord> out;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream ss(line);
    IterationRecord r;
    char c1, c2, c3, c4, c5, c6, c7, c8, c9;
    ss >> r.k >> c1 >> r.f >> c2 >> r.grad_norm >> c3 >> r.step_norm >> c4 >>
        r.lambda_star >> c5 >> r.model_decrease >> c6 >> r.actual_decrease >>
        c7 >> r.descent_rhs >> c8 >> r.subsolver_iters >> c9 >> r.wall_ns;
    if (!ss)
      throw ParseError("trace: malformed row '" + line + "'");
    out.push_back(r);
  }
  return out;
}

} // namespace crrn
