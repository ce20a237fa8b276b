#include <map>

#include "eipl/errors.hpp"
#include "eipl/psychometrics.hpp"

namespace eipl {

double cohens_kappa(std::span<const std::string> labels_a, std::span<const std::string> labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw LengthMismatchError("label lists differ in length (" + std::to_string(labels_a.size()) + " vs " +
                              std::to_string(labels_b.size()) + ")");
  }
  if (labels_a.empty()) throw InvalidArgumentError("kappa needs at least one label pair");

  const double n = static_cast<double>(labels_a.size());
  std::map<std::string_view, double> marginal_a;
  std::map<std::string_view, double> marginal_b;
  double agreements = 0.0;
  for (std::size_t k = 0; k < labels_a.size(); ++k) {
    marginal_a[labels_a[k]] += 1.0;
    marginal_b[labels_b[k]] += 1.0;
    if (labels_a[k] == labels_b[k]) agreements += 1.0;
  }
  const double observed = agreements / n;
  double chance = 0.0;
  for (const auto& [label, count] : marginal_a) {
    if (auto it = marginal_b.find(label); it != marginal_b.end()) chance += (count / n) * (it->second / n);
  }
  if (chance >= 1.0) return 1.0;  // both raters used one identical category
  return (observed - chance) / (1.0 - chance);
}

double cohens_kappa(std::span<const SoloCategory> labels_a, std::span<const SoloCategory> labels_b) {
  std::vector<std::string> a;
  std::vector<std::string> b;
  for (SoloCategory c : labels_a) a.emplace_back(to_string(c));
  for (SoloCategory c : labels_b) b.emplace_back(to_string(c));
  return cohens_kappa(std::span<const std::string>(a), std::span<const std::string>(b));
}

}  // namespace eipl
