#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eipl/domain.hpp"

namespace eipl::irt {

// Coefficient box used everywhere: theta in [-3, 3], a in [0, 2], b in [-3, 3].
inline constexpr double kThetaMin = -3.0;
inline constexpr double kThetaMax = 3.0;
inline constexpr double kDiscriminationMin = 0.0;
inline constexpr double kDiscriminationMax = 2.0;
inline constexpr double kDifficultyMin = -3.0;
inline constexpr double kDifficultyMax = 3.0;

/// Probabilities are kept inside [kProbabilityFloor, 1 - kProbabilityFloor]
/// so the cross-entropy stays finite.
inline constexpr double kProbabilityFloor = 1e-9;

/// Students x items matrix of fractional scores in [0, 1]. Cells that were
/// never observed (students see a random subset of items) are simply absent.
class ScoreMatrix {
 public:
  struct Cell {
    std::size_t student;
    std::size_t item;
    double score;
  };

  ScoreMatrix() = default;
  ScoreMatrix(std::vector<std::string> students, std::vector<std::string> items);

  /// Throws OutOfRangeError for a score outside [0, 1] (or NaN) and
  /// InvalidArgumentError for an unknown index or id.
  void set(std::size_t student, std::size_t item, double score);
  void set(std::string_view student, std::string_view item, double score);
  void erase(std::size_t student, std::size_t item);

  std::optional<double> get(std::size_t student, std::size_t item) const;
  bool observed(std::size_t student, std::size_t item) const { return get(student, item).has_value(); }

  std::size_t student_count() const { return students_.size(); }
  std::size_t item_count() const { return items_.size(); }
  std::size_t observed_count() const;

  const std::vector<std::string>& students() const { return students_; }
  const std::vector<std::string>& items() const { return items_; }

  /// Observed cells in row-major order.
  std::vector<Cell> cells() const;

  /// Throws EmptyMaskError when nothing is observed and
  /// InvalidArgumentError when a student or item has no observation.
  void check_fittable() const;

  /// Header row of item ids (first cell is the student column label), one
  /// row per student, blank cells unobserved. Throws ParseError.
  static ScoreMatrix from_csv(std::istream& in);
  void to_csv(std::ostream& out) const;

 private:
  std::size_t index(std::size_t student, std::size_t item) const;

  std::vector<std::string> students_;
  std::vector<std::string> items_;
  std::vector<std::optional<double>> scores_;
};

struct ItemParameter {
  double discrimination = 1.0;  // a
  double difficulty = 0.0;      // b

  friend bool operator==(const ItemParameter&, const ItemParameter&) = default;
};

using ItemParameters = std::vector<ItemParameter>;
/// One theta per student, in matrix order.
using AbilityEstimates = std::vector<double>;

/// P(correct | theta) = 1 / (1 + exp(-a (theta - b))), clamped to
/// [kProbabilityFloor, 1 - kProbabilityFloor].
double icc_probability(double theta, double a, double b);

/// -sum over observed cells of s log P + (1 - s) log(1 - P). Throws
/// EmptyMaskError when no cell is observed.
double cross_entropy_loss(const ScoreMatrix& matrix, const ItemParameters& items, const AbilityEstimates& abilities);

/// sum over observed cells of the binary entropy of the score; the lowest
/// value cross_entropy_loss can reach on `matrix`.
double entropy_floor(const ScoreMatrix& matrix);

struct LossGradient {
  std::vector<double> discrimination;
  std::vector<double> difficulty;
  std::vector<double> ability;
};

/// Analytic gradient of cross_entropy_loss. With r = P - s:
/// dL/da_i = sum_j r (theta_j - b_i), dL/db_i = -sum_j r a_i,
/// dL/dtheta_j = sum_i r a_i.
LossGradient loss_gradient(const ScoreMatrix& matrix, const ItemParameters& items, const AbilityEstimates& abilities);

enum class FitMethod {
  /// Projected gradient with Nesterov extrapolation, restarted whenever an
  /// extrapolated step would raise the loss. Accepted iterates never raise
  /// the loss.
  Accelerated,
  /// Fixed-step projected gradient; with backtracking the step is halved
  /// until the loss does not increase.
  Plain,
};

struct FitConfig {
  FitMethod method = FitMethod::Accelerated;
  int max_iters = 50'000;
  /// Initial step. Plain restarts every iteration from this value; the
  /// accelerated method adapts it from here.
  double step = 0.05;
  /// Stop when the relative loss decrease over the last `tolerance_window`
  /// iterations, |L_(k-w) - L_k| / |L_(k-w)|, falls below this.
  double tolerance = 1e-9;
  /// A window of 1 compares consecutive iterates. Wider windows keep an
  /// iteration whose backtracked step happened to be tiny from ending the
  /// fit early.
  int tolerance_window = 1000;
  bool backtracking = true;
  int max_halvings = 20;
  /// Called with every accepted iterate (iteration number, items, abilities).
  std::function<void(int, const ItemParameters&, const AbilityEstimates&)> on_iteration;
};

enum class StopReason { Converged, NoDescent, MaxIterations };

std::string_view to_string(StopReason reason);

struct FitReport {
  /// Accepted iterates (momentum restarts are not counted).
  int iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  /// True when the loss never increased between accepted iterates.
  bool monotone = true;
  StopReason stop_reason = StopReason::MaxIterations;
  /// Loss after initialization followed by the loss after each iteration.
  std::vector<double> loss_trajectory;
  /// Rows/columns whose observed scores are all 0 or all 1; their
  /// parameters end up at a bound.
  std::vector<std::string> degenerate_students;
  std::vector<std::string> degenerate_items;
};

struct FitResult {
  ItemParameters items;
  AbilityEstimates abilities;
  FitReport report;
};

/// Starting point: a = 1, b = 0, theta_j = logit(mean score of student j
/// clamped to [0.02, 0.98]), clamped to the theta bound.
FitResult initial_parameters(const ScoreMatrix& matrix);

/// Joint projected gradient descent on cross_entropy_loss over every
/// theta, a and b, clamping each parameter to its bound after every step.
/// Deterministic for a given matrix and config.
/// Throws EmptyMaskError, InvalidArgumentError (unobserved row/column) and
/// NonFiniteLossError.
FitResult fit_2pl(const ScoreMatrix& matrix, const FitConfig& config = {});

// ---------------------------------------------------------------------------
// Discrimination bands

enum class DiscriminationBand { VeryLow, Low, Moderate, High, VeryHigh };

std::string_view to_string(DiscriminationBand band);

/// Half-open bands: [0, .35) VeryLow, [.35, .65) Low, [.65, 1.35) Moderate,
/// [1.35, 1.70) High, [1.70, 2] VeryHigh. Throws OutOfRangeError outside
/// [0, 2].
DiscriminationBand classify_discrimination(double a);

// ---------------------------------------------------------------------------
// Serialization

/// {"items":[{id,a,b,band}], "students":[{id,theta}], "report":{...}}
Json fit_result_json(const ScoreMatrix& matrix, const FitResult& result);

struct NamedItemParameter {
  std::string id;
  ItemParameter params;
};

/// Reads the "items" array written by fit_result_json. Throws ParseError.
std::vector<NamedItemParameter> item_parameters_from_json(const Json& doc);

/// ICC curves sampled on theta in [-3, 3]: header "theta,<id>,...", one row
/// per theta step.
void write_icc_csv(std::ostream& out, std::span<const NamedItemParameter> items, double step = 0.05);

}  // namespace eipl::irt

namespace eipl {

/// Chance-corrected agreement between two raters. Returns 1 when both
/// raters used a single identical category throughout. Throws
/// LengthMismatchError for lists of different length and
/// InvalidArgumentError for empty lists.
double cohens_kappa(std::span<const std::string> labels_a, std::span<const std::string> labels_b);
double cohens_kappa(std::span<const SoloCategory> labels_a, std::span<const SoloCategory> labels_b);

}  // namespace eipl
