#pragma once

#include <crrn/types.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace crrn {

/// One outer iteration. Fields that do not apply to an algorithm are 0.
struct IterationRecord {
  Index k = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double step_norm = 0.0;
  double lambda_star = 0.0;
  double model_decrease = 0.0;
  /// f(x_k) - f(x_{k+1})
  double actual_decrease = 0.0;
  /// tau1 / 4 * step_norm^3
  double descent_rhs = 0.0;
  Index subsolver_iters = 0;
  std::int64_t wall_ns = 0;
};

enum class SolveStatus { Converged, BudgetExhausted };

struct SolveTrace {
  std::vector<IterationRecord> records;
  Matrix x_final;
  SolveStatus status = SolveStatus::BudgetExhausted;
  /// Iterates pulled back onto the manifold after drifting past tolerance.
  Index reorthonormalizations = 0;
};

struct StationarityReport {
  double epsilon = 0.0;
  double grad_norm = 0.0;
  double lambda_min = 0.0;
  /// -sqrt(epsilon)
  double lambda_threshold = 0.0;
  bool first_order = false;
  bool second_order = false;
};

extern const char *const kTraceHeader;

/// CSV with kTraceHeader; values printed with %.17g.
void write_trace_csv(std::ostream &out, const std::vector<IterationRecord> &r);
/// One JSON object per record; the optional report goes on a final line.
void write_trace_jsonl(std::ostream &out,
                       const std::vector<IterationRecord> &records,
                       const std::optional<StationarityReport> &report = {});
std::vector<IterationRecord> read_trace_csv(std::istream &in);

std::string format_double(double v);

} // namespace crrn
