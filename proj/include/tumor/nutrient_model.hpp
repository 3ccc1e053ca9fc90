#pragma once

#include <string>
#include <vector>

namespace tumor {

/// Nutrient consumption law f with f(0) = 0 and f' > 0 on the nutrient range.
///
/// Two families are supported: the identity f(u) = u, and polynomials
/// f(u) = c1 u + c2 u^2 + ... (no constant term, so f(0) = 0 holds by construction).
class NutrientModel {
 public:
  enum class Kind { identity, polynomial };

  static NutrientModel identity();

  /// `coefficients[i]` multiplies u^(i+1). Throws ValidationError unless f' > 0 on
  /// `validation_samples` points of [0, 1 + margin].
  static NutrientModel polynomial(std::vector<double> coefficients, double margin = 0.5,
                                  int validation_samples = 1024);

  /// Parses "identity" or "poly:c1,c2,...".
  static NutrientModel parse(const std::string& spec);

  Kind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coefficients_; }

  double f(double u) const;
  double fprime(double u) const;

  std::string describe() const;

 private:
  NutrientModel(Kind kind, std::vector<double> coefficients);

  Kind kind_;
  std::vector<double> coefficients_;
};

}  // namespace tumor
