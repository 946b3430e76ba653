#ifndef HOCBF_CLASSK_HPP
#define HOCBF_CLASSK_HPP

#include <cmath>
#include <string>

#include "hocbf/errors.hpp"

namespace hocbf {

// Extended class-K functions: strictly increasing on all of R with value 0 at 0.
// Three parametric kinds cover every use in the toolkit:
//   linear            k * s
//   odd_power         k * s^p, p a positive odd integer
//   scaled_exp_affine k * (e^s - 1)
// linear and odd_power admit closed-form inverses; scaled_exp_affine does not
// expose one (it is only ever used on the forward path).
enum class ClassKKind { Linear, OddPower, ScaledExpAffine };

struct ClassKSpec {
  ClassKKind kind = ClassKKind::Linear;
  double gain = 1.0;
  int exponent = 1;  // odd_power only

  static ClassKSpec linear(double gain) { return {ClassKKind::Linear, gain, 1}; }
  static ClassKSpec odd_power(double gain, int exponent) {
    return {ClassKKind::OddPower, gain, exponent};
  }
  static ClassKSpec scaled_exp_affine(double gain) {
    return {ClassKKind::ScaledExpAffine, gain, 1};
  }
};

inline void validate(const ClassKSpec& spec) {
  if (!(spec.gain > 0.0)) throw ConfigError("class-K gain must be positive");
  if (spec.kind == ClassKKind::OddPower &&
      (spec.exponent < 1 || spec.exponent % 2 == 0))
    throw ConfigError("odd_power exponent must be a positive odd integer");
}

inline double classk_eval(const ClassKSpec& spec, double s) {
  validate(spec);
  switch (spec.kind) {
    case ClassKKind::Linear:
      return spec.gain * s;
    case ClassKKind::OddPower:
      return spec.gain * std::pow(s, spec.exponent);
    case ClassKKind::ScaledExpAffine:
      return spec.gain * std::expm1(s);
  }
  throw ContractError("unknown class-K kind");
}

inline double classk_deriv(const ClassKSpec& spec, double s) {
  validate(spec);
  switch (spec.kind) {
    case ClassKKind::Linear:
      return spec.gain;
    case ClassKKind::OddPower:
      return spec.gain * spec.exponent * std::pow(s, spec.exponent - 1);
    case ClassKKind::ScaledExpAffine:
      return spec.gain * std::exp(s);
  }
  throw ContractError("unknown class-K kind");
}

inline bool classk_invertible(const ClassKSpec& spec) {
  return spec.kind != ClassKKind::ScaledExpAffine;
}

inline double classk_inverse(const ClassKSpec& spec, double y) {
  validate(spec);
  switch (spec.kind) {
    case ClassKKind::Linear:
      return y / spec.gain;
    case ClassKKind::OddPower: {
      const double scaled = y / spec.gain;
      return std::copysign(std::pow(std::fabs(scaled), 1.0 / spec.exponent), scaled);
    }
    case ClassKKind::ScaledExpAffine:
      throw UnsupportedError("scaled_exp_affine has no closed-form inverse");
  }
  throw ContractError("unknown class-K kind");
}

inline std::string to_string(ClassKKind kind) {
  switch (kind) {
    case ClassKKind::Linear: return "linear";
    case ClassKKind::OddPower: return "odd_power";
    case ClassKKind::ScaledExpAffine: return "scaled_exp_affine";
  }
  return "?";
}

inline ClassKKind classk_kind_from_string(const std::string& name) {
  if (name == "linear") return ClassKKind::Linear;
  if (name == "odd_power") return ClassKKind::OddPower;
  if (name == "scaled_exp_affine") return ClassKKind::ScaledExpAffine;
  throw ConfigError("unknown class-K kind: " + name);
}

}  // namespace hocbf

#endif  // HOCBF_CLASSK_HPP
