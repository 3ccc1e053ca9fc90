#include "tumor/nutrient_model.hpp"

#include <sstream>

#include "tumor/errors.hpp"

namespace tumor {

NutrientModel::NutrientModel(Kind kind, std::vector<double> coefficients)
    : kind_(kind), coefficients_(std::move(coefficients)) {}

NutrientModel NutrientModel::identity() { return NutrientModel(Kind::identity, {1.0}); }

NutrientModel NutrientModel::polynomial(std::vector<double> coefficients, double margin,
                                        int validation_samples) {
  if (coefficients.empty()) {
    throw ValidationError("polynomial nutrient model needs at least one coefficient");
  }
  NutrientModel model(Kind::polynomial, std::move(coefficients));
  const double upper = 1.0 + margin;
  for (int i = 0; i < validation_samples; ++i) {
    const double u = upper * i / (validation_samples - 1);
    const double slope = model.fprime(u);
    if (!(slope > 0.0)) {
      std::ostringstream msg;
      msg << "nutrient model " << model.describe() << " violates f' > 0 at u = " << u
          << " (f' = " << slope << ")";
      throw ValidationError(msg.str());
    }
  }
  return model;
}

NutrientModel NutrientModel::parse(const std::string& spec) {
  if (spec == "identity" || spec == "id") return identity();
  const std::string prefix = "poly:";
  if (spec.rfind(prefix, 0) != 0) {
    throw ValidationError("unknown nutrient model '" + spec + "' (expected identity|poly:c1,c2,...)");
  }
  std::vector<double> coeffs;
  std::stringstream in(spec.substr(prefix.size()));
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      coeffs.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad polynomial coefficient '" + item + "'");
    }
  }
  return polynomial(std::move(coeffs));
}

double NutrientModel::f(double u) const {
  if (kind_ == Kind::identity) return u;
  // Horner on u * (c1 + c2 u + ...)
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * u + *it;
  return acc * u;
}

double NutrientModel::fprime(double u) const {
  if (kind_ == Kind::identity) return 1.0;
  double acc = 0.0;
  for (std::size_t i = coefficients_.size(); i-- > 0;) {
    acc = acc * u + static_cast<double>(i + 1) * coefficients_[i];
  }
  return acc;
}

std::string NutrientModel::describe() const {
  if (kind_ == Kind::identity) return "identity";
  std::ostringstream out;
  out.precision(17);
  out << "poly:";
  for (std::size_t i = 0; i < coefficients_.size(); ++i) out << (i ? "," : "") << coefficients_[i];
  return out.str();
}

}  // namespace tumor
