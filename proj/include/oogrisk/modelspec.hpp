#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oogrisk/expr.hpp"
#include "oogrisk/sysmodel.hpp"
#include "oogrisk/uncertainty.hpp"

namespace oogrisk {

/// Matrix whose entries are literals or expressions over uncertain parameters.
class ExprMatrix {
 public:
  struct Entry {
    double value = 0.0;
    expr::NodePtr ast;  ///< null for literals
  };

  ExprMatrix() = default;
  ExprMatrix(Eigen::Index rows, Eigen::Index cols);
  static ExprMatrix literal(const Matrix& m);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  Entry& at(Eigen::Index i, Eigen::Index j) { return entries_[static_cast<size_t>(i * cols_ + j)]; }
  const Entry& at(Eigen::Index i, Eigen::Index j) const {
    return entries_[static_cast<size_t>(i * cols_ + j)];
  }
  bool has_expressions() const;
  Matrix evaluate(const expr::Bindings& b, const std::string& path) const;

 private:
  Eigen::Index rows_ = 0, cols_ = 0;
  std::vector<Entry> entries_;
};

enum class ResidualConvention {
  Literal,     ///< y_r = C_d s
  Innovation,  ///< y_r = y~ - C_d s
};

const char* to_string(ResidualConvention c);

/// Observer-based residual generator built on the nominal discretized plant:
/// A_e = A_d - K_e C_d, B_e = B_d, plus the residual output convention.
struct ObserverSpec {
  Matrix K_e;
  ResidualConvention residual = ResidualConvention::Literal;
};

struct SystemSpec {
  std::string name;
  std::string description;

  ExprMatrix A, B, C, C_J, D_J;
  bool continuous = false;
  std::optional<double> Ts;

  ControllerSpec controller;
  std::optional<DetectorSpec> detector;  ///< exactly one of detector/observer
  std::optional<ObserverSpec> observer;
  double threshold = 1.0;

  std::vector<int> attacked_actuators;
  std::vector<int> attacked_sensors;

  UncertaintySpec uncertainty;
  bool allow_unstable = false;

  Eigen::Index n_x() const { return A.rows(); }
  Eigen::Index n_u() const { return B.cols(); }
  Eigen::Index n_m() const { return C.rows(); }
  AttackChannels attack() const;
};

/// Parses and validates a JSON system description. Errors carry field paths.
SystemSpec parse_config(std::string_view text);
SystemSpec load_config(const std::string& path);

/// JSON text that parses back to an equal spec.
std::string serialize_config(const SystemSpec& spec);
bool equal(const SystemSpec& a, const SystemSpec& b);

/// Plant at parameter vector `delta` (discretized when the spec is
/// continuous). Throws ParameterOutOfRange outside the box.
PlantSpec resolve_uncertainty(const SystemSpec& spec, const Vector& delta);

/// Detector in use; the observer form is expanded on the nominal plant.
DetectorSpec resolve_detector(const SystemSpec& spec);

/// Closed loop at `delta`. Stability is enforced unless allow_unstable is set.
ClosedLoopRealization build_realization(const SystemSpec& spec, const Vector& delta,
                                        const SysTolerances& tol = {});
ClosedLoopRealization build_realization(const SystemSpec& spec, const Vector& delta,
                                        const DetectorSpec& det, const SysTolerances& tol = {});

}  // namespace oogrisk
