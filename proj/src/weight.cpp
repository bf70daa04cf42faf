#include "kgibbs/weight.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "kgibbs/errors.hpp"

namespace kgibbs {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Antiderivative of sqrt(1+x^2).
double sqrt_one_plus_sq_primitive(double x) { return 0.5 * (x * std::sqrt(1.0 + x * x) + std::asinh(x)); }

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_numbers(std::string_view body, std::string_view descriptor) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) throw InvalidWeightError("chi descriptor: empty argument in '" + std::string(descriptor) + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) {
      throw InvalidWeightError("chi descriptor: '" + token + "' is not a number");
    }
    out.push_back(v);
    token.clear();
  };
  for (char c : body) {
    if (c == ',') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<WeightFunction::Interval> merge_intervals(std::vector<WeightFunction::Interval> in) {
  std::sort(in.begin(), in.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  std::vector<WeightFunction::Interval> out;
  for (const auto& iv : in) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

}  // namespace

WeightFunction::WeightFunction(Form form) : form_(std::move(form)) { validate(); }

WeightFunction WeightFunction::zero() { return WeightFunction(Indicator{{}, 0.0}); }

WeightFunction WeightFunction::indicator(std::vector<Interval> intervals, double amplitude) {
  for (const auto& iv : intervals) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) {
      throw InvalidWeightError("chi: indicator intervals must be finite with lo < hi (chi must be integrable)");
    }
  }
  return WeightFunction(Indicator{merge_intervals(std::move(intervals)), amplitude});
}

WeightFunction WeightFunction::rational(double scale, double exponent) {
  return WeightFunction(Rational{scale, exponent});
}

WeightFunction WeightFunction::tabulated(double lo, double hi, std::vector<double> values) {
  return WeightFunction(Tabulated{lo, hi, std::move(values)});
}

void WeightFunction::validate() const {
  std::visit(Overloaded{
                 [](const Indicator& f) {
                   if (!std::isfinite(f.amplitude) || f.amplitude < 0.0) {
                     throw InvalidWeightError("chi must be nonnegative: indicator amplitude is negative");
                   }
                 },
                 [](const Rational& f) {
                   if (!std::isfinite(f.scale) || f.scale < 0.0) {
                     throw InvalidWeightError("chi must be nonnegative: rational scale is negative");
                   }
                   if (f.scale > 0.0 && !(f.exponent > 1.0)) {
                     throw InvalidWeightError(
                         "chi must satisfy sqrt(1+x^2) chi in L^1: rational exponent must exceed 1");
                   }
                 },
                 [](const Tabulated& f) {
                   if (!std::isfinite(f.lo) || !std::isfinite(f.hi) || !(f.lo < f.hi) || f.values.size() < 2) {
                     throw InvalidWeightError("chi: table needs finite lo < hi and at least two samples");
                   }
                   for (double v : f.values) {
                     if (!std::isfinite(v)) throw InvalidWeightError("chi must be bounded: table has a non-finite sample");
                     if (v < 0.0) throw InvalidWeightError("chi must be nonnegative: table has a negative sample");
                   }
                 },
             },
             form_);
}

WeightFunction WeightFunction::parse(std::string_view descriptor) {
  std::string text;
  for (char c : descriptor) {
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  }
  if (text == "zero" || text == "0") return zero();

  double amplitude = 1.0;
  std::string_view rest = text;
  if (const auto star = rest.find('*'); star != std::string_view::npos) {
    amplitude = parse_numbers(rest.substr(0, star), descriptor).at(0);
    rest.remove_prefix(star + 1);
  }
  const auto open = rest.find('(');
  if (open == std::string_view::npos || rest.back() != ')') {
    throw InvalidWeightError("chi descriptor: expected name(args) in '" + std::string(descriptor) + "'");
  }
  const std::string_view name = rest.substr(0, open);
  const auto args = parse_numbers(rest.substr(open + 1, rest.size() - open - 2), descriptor);

  if (name == "indicator") {
    if (args.empty() || args.size() % 2 != 0) {
      throw InvalidWeightError("chi descriptor: indicator needs pairs lo,hi");
    }
    std::vector<Interval> intervals;
    for (std::size_t i = 0; i < args.size(); i += 2) intervals.push_back({args[i], args[i + 1]});
    return indicator(std::move(intervals), amplitude);
  }
  if (name == "rational") {
    if (args.size() != 2) throw InvalidWeightError("chi descriptor: rational needs (scale, exponent)");
    return rational(amplitude * args[0], args[1]);
  }
  if (name == "table") {
    if (args.size() < 4) throw InvalidWeightError("chi descriptor: table needs lo, hi and two or more samples");
    std::vector<double> values(args.begin() + 2, args.end());
    for (double& v : values) v *= amplitude;
    return tabulated(args[0], args[1], std::move(values));
  }
  throw InvalidWeightError("chi descriptor: unknown profile '" + std::string(name) + "'");
}

double WeightFunction::operator()(double x) const {
  return std::visit(Overloaded{
                        [x](const Indicator& f) {
                          for (const auto& iv : f.intervals) {
                            if (x >= iv.lo && x <= iv.hi) return f.amplitude;
                          }
                          return 0.0;
                        },
                        [x](const Rational& f) { return f.scale * std::pow(1.0 + x * x, -f.exponent); },
                        [x](const Tabulated& f) {
                          if (x < f.lo || x > f.hi) return 0.0;
                          const double step = (f.hi - f.lo) / static_cast<double>(f.values.size() - 1);
                          const double pos = (x - f.lo) / step;
                          const auto i = std::min(static_cast<std::size_t>(pos), f.values.size() - 2);
                          const double frac = pos - static_cast<double>(i);
                          return (1.0 - frac) * f.values[i] + frac * f.values[i + 1];
                        },
                    },
                    form_);
}

double WeightFunction::l1_norm() const {
  return std::visit(Overloaded{
                        [](const Indicator& f) {
                          double len = 0.0;
                          for (const auto& iv : f.intervals) len += iv.hi - iv.lo;
                          return f.amplitude * len;
                        },
                        [](const Rational& f) {
                          if (f.scale == 0.0) return 0.0;
                          return f.scale * std::sqrt(std::numbers::pi) * std::tgamma(f.exponent - 0.5) /
                                 std::tgamma(f.exponent);
                        },
                        [](const Tabulated& f) {
                          const double step = (f.hi - f.lo) / static_cast<double>(f.values.size() - 1);
                          double s = 0.0;
                          for (std::size_t i = 0; i + 1 < f.values.size(); ++i) s += 0.5 * (f.values[i] + f.values[i + 1]);
                          return s * step;
                        },
                    },
                    form_);
}

double WeightFunction::sup_norm() const {
  return std::visit(Overloaded{
                        [](const Indicator& f) { return f.intervals.empty() ? 0.0 : f.amplitude; },
                        [](const Rational& f) { return f.scale; },
                        [](const Tabulated& f) { return *std::max_element(f.values.begin(), f.values.end()); },
                    },
                    form_);
}

double WeightFunction::first_moment() const {
  return std::visit(Overloaded{
                        [](const Indicator& f) {
                          double s = 0.0;
                          for (const auto& iv : f.intervals) {
                            s += sqrt_one_plus_sq_primitive(iv.hi) - sqrt_one_plus_sq_primitive(iv.lo);
                          }
                          return f.amplitude * s;
                        },
                        [](const Rational& f) {
                          if (f.scale == 0.0) return 0.0;
                          return f.scale * std::sqrt(std::numbers::pi) * std::tgamma(f.exponent - 1.0) /
                                 std::tgamma(f.exponent - 0.5);
                        },
                        [this](const Tabulated& f) {
                          // Composite Simpson, 256 panels per table segment.
                          const int panels = 256 * static_cast<int>(f.values.size() - 1);
                          const double h = (f.hi - f.lo) / panels;
                          auto g = [&](double x) { return std::sqrt(1.0 + x * x) * (*this)(x); };
                          double s = g(f.lo) + g(f.hi);
                          for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * g(f.lo + i * h);
                          return s * h / 3.0;
                        },
                    },
                    form_);
}

double WeightFunction::l2_norm_squared() const {
  return std::visit(Overloaded{
                        [](const Indicator& f) {
                          double len = 0.0;
                          for (const auto& iv : f.intervals) len += iv.hi - iv.lo;
                          return f.amplitude * f.amplitude * len;
                        },
                        [](const Rational& f) {
                          if (f.scale == 0.0) return 0.0;
                          const double g = 2.0 * f.exponent;
                          return f.scale * f.scale * std::sqrt(std::numbers::pi) * std::tgamma(g - 0.5) / std::tgamma(g);
                        },
                        [](const Tabulated& f) {
                          const double step = (f.hi - f.lo) / static_cast<double>(f.values.size() - 1);
                          double s = 0.0;
                          for (std::size_t i = 0; i + 1 < f.values.size(); ++i) {
                            const double a = f.values[i];
                            const double b = f.values[i + 1];
                            s += (a * a + a * b + b * b) / 3.0;
                          }
                          return s * step;
                        },
                    },
                    form_);
}

bool WeightFunction::is_zero() const { return sup_norm() == 0.0; }

double WeightFunction::pointwise_decay_alpha() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (const auto* r = std::get_if<Rational>(&form_); r != nullptr && r->scale > 0.0) {
    return 2.0 * r->exponent / 3.0;
  }
  return inf;
}

Eigen::VectorXd WeightFunction::sample(const FrequencyGrid& grid) const {
  Eigen::VectorXd out(grid.collocation_size());
  for (Eigen::Index m = 0; m < out.size(); ++m) out[m] = (*this)(grid.point(m));
  return out;
}

std::string WeightFunction::describe() const {
  return std::visit(Overloaded{
                        [](const Indicator& f) -> std::string {
                          if (f.intervals.empty() || f.amplitude == 0.0) return "zero";
                          std::string s = format_number(f.amplitude) + "*indicator(";
                          for (std::size_t i = 0; i < f.intervals.size(); ++i) {
                            if (i) s += ",";
                            s += format_number(f.intervals[i].lo) + "," + format_number(f.intervals[i].hi);
                          }
                          return s + ")";
                        },
                        [](const Rational& f) -> std::string {
                          return "rational(" + format_number(f.scale) + "," + format_number(f.exponent) + ")";
                        },
                        [](const Tabulated& f) -> std::string {
                          std::string s = "table(" + format_number(f.lo) + "," + format_number(f.hi);
                          for (double v : f.values) s += "," + format_number(v);
                          return s + ")";
                        },
                    },
                    form_);
}

Eigen::VectorXd periodize_weight(const WeightFunction& chi, const FrequencyGrid& grid) { return chi.sample(grid); }

}  // namespace kgibbs
