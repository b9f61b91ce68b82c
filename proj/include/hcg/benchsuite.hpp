#pragma once

// Registry of scalable unconstrained test functions with analytic gradients
// and their customary starting points (Andrei's collection, plus two
// classic two-dimensional functions).

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcg/objective.hpp"
#include <nlohmann/json.hpp>

namespace hcg {

class UnknownFunction : public std::invalid_argument {
 public:
  explicit UnknownFunction(const std::string& id) : std::invalid_argument("unknown function '" + id + "'") {}
};

class UnsupportedDimension : public std::invalid_argument {
 public:
  UnsupportedDimension(const std::string& id, std::size_t n)
      : std::invalid_argument("function '" + id + "' does not support n = " + std::to_string(n)) {}
};

enum class DimRule { Any, Even, MultipleOf4, OnlyTwo };

inline bool dim_allowed(DimRule rule, std::size_t n) {
  switch (rule) {
    case DimRule::Any: return n >= 2;
    case DimRule::Even: return n >= 2 && n % 2 == 0;
    case DimRule::MultipleOf4: return n >= 4 && n % 4 == 0;
    case DimRule::OnlyTwo: return n == 2;
  }
  return false;
}

inline const std::vector<std::size_t>& default_dims() {
  static const std::vector<std::size_t> dims{2, 10, 100, 1000};
  return dims;
}

struct ProblemInstance {
  std::string function_id;
  std::size_t n = 0;
  Problem problem;

  std::string id() const { return problem.name; }
  const Vector& x0() const { return problem.x0; }
  const std::optional<double>& f_star() const { return problem.f_star; }
};

struct FunctionSpec {
  std::string id;
  DimRule dims = DimRule::Any;
  std::string start_rule;
  std::function<Vector(std::size_t)> start;
  ValueFn f;
  GradientFn g;
  std::function<std::optional<double>(std::size_t)> f_star = [](std::size_t) { return std::nullopt; };
};

struct FunctionInfo {
  std::string id;
  std::vector<std::size_t> dims;
};

inline std::string instance_id(const std::string& function_id, std::size_t n) {
  return function_id + "_n" + std::to_string(n);
}

class Registry {
 public:
  void add(FunctionSpec spec) {
    const std::string id = spec.id;
    specs_.insert_or_assign(id, std::move(spec));
  }

  bool contains(const std::string& id) const { return specs_.count(id) != 0; }

  const FunctionSpec& spec(const std::string& id) const {
    const auto it = specs_.find(id);
    if (it == specs_.end()) throw UnknownFunction(id);
    return it->second;
  }

  bool supports(const std::string& id, std::size_t n) const { return dim_allowed(spec(id).dims, n); }

  /// Sorted by id; dims are the defaults the function supports.
  std::vector<FunctionInfo> list(const std::vector<std::size_t>& dims = default_dims()) const {
    std::vector<FunctionInfo> out;
    for (const auto& [id, s] : specs_) {
      FunctionInfo info{id, {}};
      for (std::size_t n : dims)
        if (dim_allowed(s.dims, n)) info.dims.push_back(n);
      out.push_back(std::move(info));
    }
    return out;
  }

  ProblemInstance instantiate(const std::string& id, std::size_t n) const {
    const FunctionSpec& s = spec(id);
    if (!dim_allowed(s.dims, n)) throw UnsupportedDimension(id, n);
    ProblemInstance inst;
    inst.function_id = id;
    inst.n = n;
    inst.problem = Problem(instance_id(id, n), s.start(n), s.f, s.g, s.f_star(n));
    return inst;
  }

  /// Cross product of the registry with `dims`, restricted to supported
  /// pairs; ordered by function id, then dimension.
  std::vector<ProblemInstance> full_grid(const std::vector<std::size_t>& dims = default_dims()) const {
    std::vector<std::size_t> sorted(dims);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<ProblemInstance> out;
    for (const auto& [id, s] : specs_)
      for (std::size_t n : sorted)
        if (dim_allowed(s.dims, n)) out.push_back(instantiate(id, n));
    return out;
  }

  nlohmann::json manifest(const std::vector<std::size_t>& dims = default_dims()) const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& info : list(dims)) {
      const FunctionSpec& s = spec(info.id);
      nlohmann::json fstar = nlohmann::json::object();
      for (std::size_t n : info.dims) {
        const auto v = s.f_star(n);
        fstar[std::to_string(n)] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
      }
      arr.push_back({{"id", info.id}, {"n", info.dims}, {"start_rule", s.start_rule}, {"f_star", fstar}});
    }
    return arr;
  }

  static const Registry& standard();

 private:
  std::map<std::string, FunctionSpec> specs_;
};

namespace suite {

using Span = std::span<const double>;
using Out = std::span<double>;

inline std::function<Vector(std::size_t)> constant_start(double v) {
  return [v](std::size_t n) { return Vector(n, v); };
}

inline std::function<Vector(std::size_t)> pattern_start(Vector pattern) {
  return [pattern](std::size_t n) {
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = pattern[i % pattern.size()];
    return x;
  };
}

// Builds f/g for sum over consecutive disjoint pairs of a two-variable term.
struct PairTerm {
  std::function<double(double, double)> value;
  std::function<void(double, double, double&, double&)> grad;
};

inline void add_pairwise(Registry& reg, std::string id, std::string start_rule, Vector pattern, PairTerm term,
                         std::optional<double> per_pair_min) {
  FunctionSpec s;
  s.id = std::move(id);
  s.dims = DimRule::Even;
  s.start_rule = std::move(start_rule);
  s.start = pattern_start(std::move(pattern));
  s.f = [term](Span x) {
    CompensatedSum f;
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) f += term.value(x[i], x[i + 1]);
    return f.value();
  };
  s.g = [term](Span x, Out g) {
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) term.grad(x[i], x[i + 1], g[i], g[i + 1]);
  };
  if (per_pair_min)
    s.f_star = [m = *per_pair_min](std::size_t n) -> std::optional<double> { return m * static_cast<double>(n / 2); };
  reg.add(std::move(s));
}

// Builds f/g for a separable sum of phi_i(x_i), i = 1..n.
inline void add_separable(Registry& reg, std::string id, std::string start_rule,
                          std::function<Vector(std::size_t)> start, std::function<double(double, double)> phi,
                          std::function<double(double, double)> dphi,
                          std::function<std::optional<double>(std::size_t)> f_star) {
  FunctionSpec s;
  s.id = std::move(id);
  s.start_rule = std::move(start_rule);
  s.start = std::move(start);
  s.f = [phi](Span x) {
    CompensatedSum f;
    for (std::size_t i = 0; i < x.size(); ++i) f += phi(static_cast<double>(i + 1), x[i]);
    return f.value();
  };
  s.g = [dphi](Span x, Out g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = dphi(static_cast<double>(i + 1), x[i]);
  };
  s.f_star = std::move(f_star);
  reg.add(std::move(s));
}

inline Registry build_standard() {
  Registry reg;

  add_pairwise(reg, "ext_rosenbrock", "(-1.2, 1, -1.2, 1, ...)", {-1.2, 1.0},
               {[](double a, double b) {
                  const double t = b - a * a;
                  return 100.0 * t * t + (1.0 - a) * (1.0 - a);
                },
                [](double a, double b, double& ga, double& gb) {
                  const double t = b - a * a;
                  ga = -400.0 * a * t - 2.0 * (1.0 - a);
                  gb = 200.0 * t;
                }},
               0.0);

  add_pairwise(reg, "ext_white_holst", "(-1.2, 1, -1.2, 1, ...)", {-1.2, 1.0},
               {[](double a, double b) {
                  const double t = b - a * a * a;
                  return 100.0 * t * t + (1.0 - a) * (1.0 - a);
                },
                [](double a, double b, double& ga, double& gb) {
                  const double t = b - a * a * a;
                  ga = -600.0 * a * a * t - 2.0 * (1.0 - a);
                  gb = 200.0 * t;
                }},
               0.0);

  add_pairwise(reg, "ext_beale", "(1, 0.8, 1, 0.8, ...)", {1.0, 0.8},
               {[](double a, double b) {
                  const double t1 = 1.5 - a * (1.0 - b);
                  const double t2 = 2.25 - a * (1.0 - b * b);
                  const double t3 = 2.625 - a * (1.0 - b * b * b);
                  return t1 * t1 + t2 * t2 + t3 * t3;
                },
                [](double a, double b, double& ga, double& gb) {
                  const double t1 = 1.5 - a * (1.0 - b);
                  const double t2 = 2.25 - a * (1.0 - b * b);
                  const double t3 = 2.625 - a * (1.0 - b * b * b);
                  ga = -2.0 * (t1 * (1.0 - b) + t2 * (1.0 - b * b) + t3 * (1.0 - b * b * b));
                  gb = 2.0 * a * (t1 + 2.0 * b * t2 + 3.0 * b * b * t3);
                }},
               0.0);

  add_pairwise(reg, "ext_himmelblau", "(1, 1, ...)", {1.0, 1.0},
               {[](double a, double b) {
                  const double p = a * a + b - 11.0;
                  const double q = a + b * b - 7.0;
                  return p * p + q * q;
                },
                [](double a, double b, double& ga, double& gb) {
                  const double p = a * a + b - 11.0;
                  const double q = a + b * b - 7.0;
                  ga = 4.0 * a * p + 2.0 * q;
                  gb = 2.0 * p + 4.0 * b * q;
                }},
               0.0);

  add_pairwise(reg, "ext_tridiagonal1", "(2, 2, ...)", {2.0, 2.0},
               {[](double a, double b) {
                  const double p = a + b - 3.0;
                  const double q = a - b + 1.0;
                  return p * p + q * q * q * q;
                },
                [](double a, double b, double& ga, double& gb) {
                  const double p = a + b - 3.0;
                  const double q = a - b + 1.0;
                  ga = 2.0 * p + 4.0 * q * q * q;
                  gb = 2.0 * p - 4.0 * q * q * q;
                }},
               0.0);

  add_pairwise(reg, "ext_denschnb", "(1, 1, ...)", {1.0, 1.0},
               {[](double a, double b) {
                  const double p = a - 2.0;
                  return p * p + p * p * b * b + (b + 1.0) * (b + 1.0);
                },
                [](double a, double b, double& ga, double& gb) {
                  const double p = a - 2.0;
                  ga = 2.0 * p * (1.0 + b * b);
                  gb = 2.0 * p * p * b + 2.0 * (b + 1.0);
                }},
               0.0);

  {
    FunctionSpec s;
    s.id = "ext_powell";
    s.dims = DimRule::MultipleOf4;
    s.start_rule = "(3, -1, 0, 1, ...)";
    s.start = pattern_start({3.0, -1.0, 0.0, 1.0});
    s.f = [](Span x) {
      CompensatedSum f;
      for (std::size_t i = 0; i + 3 < x.size(); i += 4) {
        const double a = x[i] + 10.0 * x[i + 1];
        const double b = x[i + 2] - x[i + 3];
        const double c = x[i + 1] - 2.0 * x[i + 2];
        const double e = x[i] - x[i + 3];
        f += a * a + 5.0 * b * b + c * c * c * c + 10.0 * e * e * e * e;
      }
      return f.value();
    };
    s.g = [](Span x, Out g) {
      for (std::size_t i = 0; i + 3 < x.size(); i += 4) {
        const double a = x[i] + 10.0 * x[i + 1];
        const double b = x[i + 2] - x[i + 3];
        const double c = x[i + 1] - 2.0 * x[i + 2];
        const double e = x[i] - x[i + 3];
        g[i] = 2.0 * a + 40.0 * e * e * e;
        g[i + 1] = 20.0 * a + 4.0 * c * c * c;
        g[i + 2] = 10.0 * b - 8.0 * c * c * c;
        g[i + 3] = -10.0 * b - 40.0 * e * e * e;
      }
    };
    s.f_star = [](std::size_t) -> std::optional<double> { return 0.0; };
    reg.add(std::move(s));
  }

  {
    FunctionSpec s;
    s.id = "ext_qp1";
    s.start_rule = "(1, 1, ...)";
    s.start = constant_start(1.0);
    s.f = [](Span x) {
      CompensatedSum f;
      CompensatedSum ss;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (i + 1 < x.size()) f += (x[i] * x[i] - 2.0) * (x[i] * x[i] - 2.0);
        ss += x[i] * x[i];
      }
      const double p = ss.value() - 0.5;
      f += p * p;
      return f.value();
    };
    s.g = [](Span x, Out g) {
      CompensatedSum acc;
      for (double v : x) acc += v * v;
      const double ss = acc.value();
      for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = (i + 1 < x.size() ? 4.0 * x[i] * (x[i] * x[i] - 2.0) : 0.0) + 4.0 * x[i] * (ss - 0.5);
    };
    reg.add(std::move(s));
  }

  {
    FunctionSpec s;
    s.id = "perturbed_quadratic";
    s.start_rule = "(0.5, 0.5, ...)";
    s.start = constant_start(0.5);
    s.f = [](Span x) {
      CompensatedSum f;
      CompensatedSum sum;
      for (std::size_t i = 0; i < x.size(); ++i) {
        f += static_cast<double>(i + 1) * x[i] * x[i];
        sum += x[i];
      }
      f += sum.value() * sum.value() / 100.0;
      return f.value();
    };
    s.g = [](Span x, Out g) {
      CompensatedSum acc;
      for (double v : x) acc += v;
      const double sum = acc.value();
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * static_cast<double>(i + 1) * x[i] + sum / 50.0;
    };
    s.f_star = [](std::size_t) -> std::optional<double> { return 0.0; };
    reg.add(std::move(s));
  }

  {
    FunctionSpec s;
    s.id = "gen_tridiagonal1";
    s.start_rule = "(2, 2, ...)";
    s.start = constant_start(2.0);
    s.f = [](Span x) {
      CompensatedSum f;
      for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double p = x[i] + x[i + 1] - 3.0;
        const double q = x[i] - x[i + 1] + 1.0;
        f += p * p + q * q * q * q;
      }
      return f.value();
    };
    s.g = [](Span x, Out g) {
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double p = x[i] + x[i + 1] - 3.0;
        const double q = x[i] - x[i + 1] + 1.0;
        g[i] += 2.0 * p + 4.0 * q * q * q;
        g[i + 1] += 2.0 * p - 4.0 * q * q * q;
      }
    };
    reg.add(std::move(s));
  }

  {
    FunctionSpec s;
    s.id = "quadratic_qf1";
    s.start_rule = "(1, 1, ...)";
    s.start = constant_start(1.0);
    s.f = [](Span x) {
      CompensatedSum f;
      for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * static_cast<double>(i + 1) * x[i] * x[i];
      f += -x.back();
      return f.value();
    };
    s.g = [](Span x, Out g) {
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = static_cast<double>(i + 1) * x[i];
      g[x.size() - 1] -= 1.0;
    };
    s.f_star = [](std::size_t n) -> std::optional<double> { return -0.5 / static_cast<double>(n); };
    reg.add(std::move(s));
  }

  add_separable(
      reg, "sum_squares", "(0.5, 0.5, ...)", constant_start(0.5), [](double i, double v) { return i * v * v; },
      [](double i, double v) { return 2.0 * i * v; }, [](std::size_t) -> std::optional<double> { return 0.0; });

  add_separable(
      reg, "raydan1", "(1, 1, ...)", constant_start(1.0),
      [](double i, double v) { return i / 10.0 * (std::exp(v) - v); },
      [](double i, double v) { return i / 10.0 * (std::exp(v) - 1.0); },
      [](std::size_t n) -> std::optional<double> {
        return static_cast<double>(n) * static_cast<double>(n + 1) / 20.0;
      });

  add_separable(
      reg, "raydan2", "(1, 1, ...)", constant_start(1.0), [](double, double v) { return std::exp(v) - v; },
      [](double, double v) { return std::exp(v) - 1.0; },
      [](std::size_t n) -> std::optional<double> { return static_cast<double>(n); });

  add_separable(
      reg, "diagonal1", "(1/n, 1/n, ...)", [](std::size_t n) { return Vector(n, 1.0 / static_cast<double>(n)); },
      [](double i, double v) { return std::exp(v) - i * v; }, [](double i, double v) { return std::exp(v) - i; },
      [](std::size_t n) -> std::optional<double> {
        double f = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
          const double i = static_cast<double>(k);
          f += i - i * std::log(i);
        }
        return f;
      });

  add_separable(
      reg, "diagonal2", "x_i = 1/i",
      [](std::size_t n) {
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 / static_cast<double>(i + 1);
        return x;
      },
      [](double i, double v) { return std::exp(v) - v / i; }, [](double i, double v) { return std::exp(v) - 1.0 / i; },
      [](std::size_t n) -> std::optional<double> {
        double f = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
          const double i = static_cast<double>(k);
          f += (1.0 + std::log(i)) / i;
        }
        return f;
      });

  add_separable(
      reg, "hager", "(1, 1, ...)", constant_start(1.0), [](double i, double v) { return std::exp(v) - std::sqrt(i) * v; },
      [](double i, double v) { return std::exp(v) - std::sqrt(i); },
      [](std::size_t n) -> std::optional<double> {
        double f = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
          const double r = std::sqrt(static_cast<double>(k));
          f += r - r * std::log(r);
        }
        return f;
      });

  add_pairwise(reg, "diagonal4", "(1, 1, ...)", {1.0, 1.0},
               {[](double a, double b) { return 0.5 * (a * a + 100.0 * b * b); },
                [](double a, double b, double& ga, double& gb) {
                  ga = a;
                  gb = 100.0 * b;
                }},
               0.0);

  {
    FunctionSpec s;
    s.id = "arwhead";
    s.start_rule = "(1, 1, ...)";
    s.start = constant_start(1.0);
    s.f = [](Span x) {
      const double xn2 = x.back() * x.back();
      CompensatedSum f;
      // (x^2 + xn^2)^2 - 4x + 3 regrouped as (x-1)^2 (x^2+2x+3) + 2x^2 xn^2 + xn^4,
      // which has no cancellation near the minimizer (1, ..., 1, 0).
      for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double v = x[i];
        const double e = v - 1.0;
        f += e * e * (v * v + 2.0 * v + 3.0) + xn2 * (2.0 * v * v + xn2);
      }
      return f.value();
    };
    s.g = [](Span x, Out g) {
      const std::size_t last = x.size() - 1;
      const double xn = x[last];
      const double xn2 = xn * xn;
      CompensatedSum gn;
      for (std::size_t i = 0; i < last; ++i) {
        const double q = x[i] * x[i] + xn2;
        g[i] = -4.0 + 4.0 * x[i] * q;
        gn += 4.0 * xn * q;
      }
      g[last] = gn.value();
    };
    s.f_star = [](std::size_t) -> std::optional<double> { return 0.0; };
    reg.add(std::move(s));
  }

  {
    FunctionSpec s;
    s.id = "six_hump_camel";
    s.dims = DimRule::OnlyTwo;
    s.start_rule = "(-0.5, 0.5)";
    s.start = [](std::size_t) { return Vector{-0.5, 0.5}; };
    s.f = [](Span x) {
      const double a = x[0], b = x[1];
      const double a2 = a * a, b2 = b * b;
      return (4.0 - 2.1 * a2 + a2 * a2 / 3.0) * a2 + a * b + (-4.0 + 4.0 * b2) * b2;
    };
    s.g = [](Span x, Out g) {
      const double a = x[0], b = x[1];
      g[0] = 8.0 * a - 8.4 * a * a * a + 2.0 * a * a * a * a * a + b;
      g[1] = a - 8.0 * b + 16.0 * b * b * b;
    };
    s.f_star = [](std::size_t) -> std::optional<double> { return -1.0316284534898774; };
    reg.add(std::move(s));
  }

  {
    FunctionSpec s;
    s.id = "booth";
    s.dims = DimRule::OnlyTwo;
    s.start_rule = "(0, 0)";
    s.start = [](std::size_t) { return Vector{0.0, 0.0}; };
    s.f = [](Span x) {
      const double p = x[0] + 2.0 * x[1] - 7.0;
      const double q = 2.0 * x[0] + x[1] - 5.0;
      return p * p + q * q;
    };
    s.g = [](Span x, Out g) {
      const double p = x[0] + 2.0 * x[1] - 7.0;
      const double q = 2.0 * x[0] + x[1] - 5.0;
      g[0] = 2.0 * p + 4.0 * q;
      g[1] = 4.0 * p + 2.0 * q;
    };
    s.f_star = [](std::size_t) -> std::optional<double> { return 0.0; };
    reg.add(std::move(s));
  }

  return reg;
}

}  // namespace suite

inline const Registry& Registry::standard() {
  static const Registry reg = suite::build_standard();
  return reg;
}

inline std::vector<FunctionInfo> list_functions() { return Registry::standard().list(); }

inline ProblemInstance instantiate(const std::string& function_id, std::size_t n) {
  return Registry::standard().instantiate(function_id, n);
}

inline std::vector<ProblemInstance> full_grid(const std::vector<std::size_t>& dims = default_dims()) {
  return Registry::standard().full_grid(dims);
}

}  // namespace hcg
