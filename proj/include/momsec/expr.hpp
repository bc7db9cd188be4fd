#pragma once

// Immutable symbolic expression trees over a named coordinate chart.
// Supports parsing, exact differentiation, pointwise evaluation, and a
// light structural simplifier (constant folding, 0/1 absorption,
// like-term merging).  Deliberately not a general CAS.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace momsec {

namespace detail {
struct NodeAccess;
}

struct Chart {
  std::vector<std::string> coords;

  Chart() = default;
  explicit Chart(std::vector<std::string> names) : coords(std::move(names)) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i].empty())
        throw std::invalid_argument("chart: empty coordinate name");
      for (std::size_t j = i + 1; j < coords.size(); ++j)
        if (coords[i] == coords[j])
          throw std::invalid_argument("chart: duplicate coordinate name '" +
                                      coords[i] + "'");
    }
  }

  int dim() const { return static_cast<int>(coords.size()); }

  int index_of(std::string_view name) const {
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (coords[i] == name) return static_cast<int>(i);
    return -1;
  }

  const std::string& name(int i) const { return coords.at(i); }

  bool operator==(const Chart& o) const { return coords == o.coords; }
  bool operator!=(const Chart& o) const { return !(*this == o); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Expr {
 public:
  enum class Kind {
    Constant,
    Coord,
    Sum,
    Product,
    Neg,
    Quotient,
    Power,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt
  };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double c) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = c;
    return Expr(std::move(n));
  }

  static Expr coord(int index) {
    if (index < 0) throw std::invalid_argument("coord: negative index");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Coord;
    n->index = index;
    return Expr(std::move(n));
  }

  Kind kind() const { return node_->kind; }
  double value() const { return node_->value; }          // Constant
  int index() const { return node_->index; }             // Coord
  int exponent() const { return node_->exponent; }       // Power
  const std::vector<Expr>& kids() const { return node_->kids; }

  bool is_constant(double c) const {
    return kind() == Kind::Constant && value() == c;
  }

  // Total structural order; 0 means structurally identical.
  static int compare(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return 0;
    if (a.kind() != b.kind())
      return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    switch (a.kind()) {
      case Kind::Constant:
        if (a.value() < b.value()) return -1;
        if (a.value() > b.value()) return 1;
        return 0;
      case Kind::Coord:
        return a.index() - b.index();
      case Kind::Power:
        if (a.exponent() != b.exponent())
          return a.exponent() < b.exponent() ? -1 : 1;
        break;
      default:
        break;
    }
    const auto& ka = a.kids();
    const auto& kb = b.kids();
    if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
    for (std::size_t i = 0; i < ka.size(); ++i)
      if (int c = compare(ka[i], kb[i])) return c;
    return 0;
  }

  friend bool identical(const Expr& a, const Expr& b) {
    return compare(a, b) == 0;
  }

 private:
  struct Node {
    Kind kind = Kind::Constant;
    double value = 0.0;
    int index = 0;
    int exponent = 0;
    std::vector<Expr> kids;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Expr make(Kind k, std::vector<Expr> kids, int exp = 0) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->kids = std::move(kids);
    n->exponent = exp;
    return Expr(std::move(n));
  }

  std::shared_ptr<const Node> node_;

  friend Expr sum_of(std::vector<Expr>);
  friend Expr product_of(std::vector<Expr>);
  friend Expr neg(const Expr&);
  friend Expr quotient(const Expr&, const Expr&);
  friend Expr pow(const Expr&, int);
  friend Expr unary(Kind, const Expr&);
  friend struct detail::NodeAccess;
};

namespace detail {
struct NodeAccess {
  static Expr make(Expr::Kind k, std::vector<Expr> kids, int exp = 0) {
    return Expr::make(k, std::move(kids), exp);
  }
};
}  // namespace detail

// ---------------------------------------------------------------------------
// Smart constructors.  These do local folding only (no recursion into kids),
// so building large expressions stays cheap while avoiding obvious zeros.

inline Expr unary(Expr::Kind k, const Expr& u) {
  return Expr::make(k, {u});
}

inline Expr sum_of(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  double c = 0.0;
  for (auto& t : terms) {
    if (t.kind() == Expr::Kind::Constant) {
      c += t.value();
    } else if (t.kind() == Expr::Kind::Sum) {
      for (auto& k : t.kids()) {
        if (k.kind() == Expr::Kind::Constant)
          c += k.value();
        else
          flat.push_back(k);
      }
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (c != 0.0 || flat.empty()) flat.insert(flat.begin(), Expr::constant(c));
  if (flat.size() == 1) return flat[0];
  return Expr::make(Expr::Kind::Sum, std::move(flat));
}

inline Expr product_of(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  double c = 1.0;
  for (auto& f : factors) {
    if (f.kind() == Expr::Kind::Constant) {
      c *= f.value();
    } else if (f.kind() == Expr::Kind::Product) {
      for (auto& k : f.kids()) {
        if (k.kind() == Expr::Kind::Constant)
          c *= k.value();
        else
          flat.push_back(k);
      }
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (c == 0.0) return Expr::constant(0.0);
  if (c != 1.0 || flat.empty()) flat.insert(flat.begin(), Expr::constant(c));
  if (flat.size() == 1) return flat[0];
  return Expr::make(Expr::Kind::Product, std::move(flat));
}

inline Expr neg(const Expr& u) {
  if (u.kind() == Expr::Kind::Constant) return Expr::constant(-u.value());
  if (u.kind() == Expr::Kind::Neg) return u.kids()[0];
  return Expr::make(Expr::Kind::Neg, {u});
}

inline Expr quotient(const Expr& u, const Expr& v) {
  if (v.is_constant(1.0)) return u;
  return Expr::make(Expr::Kind::Quotient, {u, v});
}

inline Expr pow(const Expr& u, int n) {
  if (n == 0) return Expr::constant(1.0);
  if (n == 1) return u;
  return Expr::make(Expr::Kind::Power, {u}, n);
}

inline Expr operator+(const Expr& a, const Expr& b) { return sum_of({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) {
  return sum_of({a, neg(b)});
}
inline Expr operator-(const Expr& a) { return neg(a); }
inline Expr operator*(const Expr& a, const Expr& b) {
  return product_of({a, b});
}
inline Expr operator/(const Expr& a, const Expr& b) { return quotient(a, b); }
inline Expr operator*(double a, const Expr& b) {
  return product_of({Expr::constant(a), b});
}
inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) {
  return Expr::constant(a) - b;
}

inline Expr sin(const Expr& u) { return unary(Expr::Kind::Sin, u); }
inline Expr cos(const Expr& u) { return unary(Expr::Kind::Cos, u); }
inline Expr exp(const Expr& u) { return unary(Expr::Kind::Exp, u); }
inline Expr log(const Expr& u) { return unary(Expr::Kind::Log, u); }
inline Expr sqrt(const Expr& u) { return unary(Expr::Kind::Sqrt, u); }

// ---------------------------------------------------------------------------
// Printing (used for diagnostics and domain-error messages).

namespace detail {

inline void print_expr(std::ostream& os, const Expr& e, const Chart* chart,
                       int parent_prec);

inline void print_child(std::ostream& os, const Expr& e, const Chart* chart,
                        int prec) {
  print_expr(os, e, chart, prec);
}

// precedence: 0 sum, 1 product/quotient, 2 unary minus, 3 power, 4 atom
inline int precedence_of(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Sum: return 0;
    case Expr::Kind::Product:
    case Expr::Kind::Quotient: return 1;
    case Expr::Kind::Neg: return 2;
    case Expr::Kind::Power: return 3;
    default: return 4;
  }
}

inline void print_expr(std::ostream& os, const Expr& e, const Chart* chart,
                       int parent_prec) {
  int prec = precedence_of(e);
  bool need_paren = prec < parent_prec;
  if (need_paren) os << '(';
  switch (e.kind()) {
    case Expr::Kind::Constant: {
      double v = e.value();
      if (v < 0 && parent_prec > 0 && !need_paren) {
        os << '(' << v << ')';
      } else {
        os << v;
      }
      break;
    }
    case Expr::Kind::Coord:
      if (chart && e.index() < chart->dim())
        os << chart->name(e.index());
      else
        os << "x" << e.index();
      break;
    case Expr::Kind::Sum:
      for (std::size_t i = 0; i < e.kids().size(); ++i) {
        const Expr& k = e.kids()[i];
        if (i == 0) {
          print_child(os, k, chart, 0);
        } else if (k.kind() == Expr::Kind::Neg) {
          os << " - ";
          print_child(os, k.kids()[0], chart, 1);
        } else {
          os << " + ";
          print_child(os, k, chart, 1);
        }
      }
      break;
    case Expr::Kind::Product:
      for (std::size_t i = 0; i < e.kids().size(); ++i) {
        if (i) os << '*';
        print_child(os, e.kids()[i], chart, 2);
      }
      break;
    case Expr::Kind::Neg:
      os << '-';
      print_child(os, e.kids()[0], chart, 3);
      break;
    case Expr::Kind::Quotient:
      print_child(os, e.kids()[0], chart, 2);
      os << '/';
      print_child(os, e.kids()[1], chart, 3);
      break;
    case Expr::Kind::Power:
      print_child(os, e.kids()[0], chart, 4);
      os << '^';
      if (e.exponent() < 0)
        os << '(' << e.exponent() << ')';
      else
        os << e.exponent();
      break;
    case Expr::Kind::Sin: os << "sin("; print_child(os, e.kids()[0], chart, 0); os << ')'; break;
    case Expr::Kind::Cos: os << "cos("; print_child(os, e.kids()[0], chart, 0); os << ')'; break;
    case Expr::Kind::Exp: os << "exp("; print_child(os, e.kids()[0], chart, 0); os << ')'; break;
    case Expr::Kind::Log: os << "log("; print_child(os, e.kids()[0], chart, 0); os << ')'; break;
    case Expr::Kind::Sqrt: os << "sqrt("; print_child(os, e.kids()[0], chart, 0); os << ')'; break;
  }
  if (need_paren) os << ')';
}

}  // namespace detail

inline std::string to_string(const Expr& e, const Chart& chart) {
  std::ostringstream os;
  detail::print_expr(os, e, &chart, 0);
  return os.str();
}

inline std::string to_string(const Expr& e) {
  std::ostringstream os;
  detail::print_expr(os, e, nullptr, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace detail {

inline std::string point_string(std::span<const double> x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ')';
  return os.str();
}

[[noreturn]] inline void domain_fail(const Expr& e, std::span<const double> x,
                                     const std::string& what) {
  throw DomainError("domain error: " + what + " in '" + to_string(e) +
                    "' at point " + point_string(x));
}

inline double eval_node(const Expr& e, std::span<const double> x) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return e.value();
    case Expr::Kind::Coord:
      if (e.index() >= static_cast<int>(x.size()))
        throw std::invalid_argument(
            "eval: coordinate index " + std::to_string(e.index()) +
            " out of range for point of dimension " +
            std::to_string(x.size()));
      return x[e.index()];
    case Expr::Kind::Sum: {
      double s = 0.0;
      for (const auto& k : e.kids()) s += eval_node(k, x);
      return s;
    }
    case Expr::Kind::Product: {
      double p = 1.0;
      for (const auto& k : e.kids()) p *= eval_node(k, x);
      return p;
    }
    case Expr::Kind::Neg:
      return -eval_node(e.kids()[0], x);
    case Expr::Kind::Quotient: {
      double den = eval_node(e.kids()[1], x);
      if (den == 0.0) domain_fail(e, x, "division by zero");
      return eval_node(e.kids()[0], x) / den;
    }
    case Expr::Kind::Power: {
      double b = eval_node(e.kids()[0], x);
      int n = e.exponent();
      if (b == 0.0 && n < 0) domain_fail(e, x, "zero base with negative exponent");
      double r = 1.0;
      int m = n < 0 ? -n : n;
      double acc = b;
      while (m) {
        if (m & 1) r *= acc;
        acc *= acc;
        m >>= 1;
      }
      return n < 0 ? 1.0 / r : r;
    }
    case Expr::Kind::Sin:
      return std::sin(eval_node(e.kids()[0], x));
    case Expr::Kind::Cos:
      return std::cos(eval_node(e.kids()[0], x));
    case Expr::Kind::Exp:
      return std::exp(eval_node(e.kids()[0], x));
    case Expr::Kind::Log: {
      double u = eval_node(e.kids()[0], x);
      if (u <= 0.0) domain_fail(e, x, "log of non-positive value");
      return std::log(u);
    }
    case Expr::Kind::Sqrt: {
      double u = eval_node(e.kids()[0], x);
      if (u < 0.0) domain_fail(e, x, "sqrt of negative value");
      return std::sqrt(u);
    }
  }
  throw std::logic_error("eval: unreachable");
}

}  // namespace detail

inline double eval(const Expr& e, std::span<const double> x) {
  double v = detail::eval_node(e, x);
  if (!std::isfinite(v)) detail::domain_fail(e, x, "non-finite result");
  return v;
}

inline double eval(const Expr& e, const std::vector<double>& x) {
  return eval(e, std::span<const double>(x));
}

// ---------------------------------------------------------------------------
// Differentiation (exact, closed under the node set).

inline Expr diff(const Expr& e, int i) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant:
      return Expr::constant(0.0);
    case K::Coord:
      return Expr::constant(e.index() == i ? 1.0 : 0.0);
    case K::Sum: {
      std::vector<Expr> terms;
      terms.reserve(e.kids().size());
      for (const auto& k : e.kids()) terms.push_back(diff(k, i));
      return sum_of(std::move(terms));
    }
    case K::Product: {
      std::vector<Expr> terms;
      for (std::size_t j = 0; j < e.kids().size(); ++j) {
        std::vector<Expr> factors;
        factors.reserve(e.kids().size());
        for (std::size_t l = 0; l < e.kids().size(); ++l)
          factors.push_back(l == j ? diff(e.kids()[l], i) : e.kids()[l]);
        terms.push_back(product_of(std::move(factors)));
      }
      return sum_of(std::move(terms));
    }
    case K::Neg:
      return neg(diff(e.kids()[0], i));
    case K::Quotient: {
      const Expr& u = e.kids()[0];
      const Expr& v = e.kids()[1];
      return quotient(diff(u, i) * v - u * diff(v, i), pow(v, 2));
    }
    case K::Power: {
      const Expr& u = e.kids()[0];
      int n = e.exponent();
      return Expr::constant(static_cast<double>(n)) * pow(u, n - 1) *
             diff(u, i);
    }
    case K::Sin:
      return cos(e.kids()[0]) * diff(e.kids()[0], i);
    case K::Cos:
      return neg(sin(e.kids()[0]) * diff(e.kids()[0], i));
    case K::Exp:
      return e * diff(e.kids()[0], i);
    case K::Log:
      return quotient(diff(e.kids()[0], i), e.kids()[0]);
    case K::Sqrt:
      return quotient(diff(e.kids()[0], i),
                      Expr::constant(2.0) * sqrt(e.kids()[0]));
  }
  throw std::logic_error("diff: unreachable");
}

// ---------------------------------------------------------------------------
// Simplification: recursive constant folding, 0/1 absorption, like-term and
// like-factor merging with a canonical child order.  Idempotent.

namespace detail {

inline Expr simplify_node(const Expr& e);

struct Term {
  double coeff;
  Expr core;  // never Constant / Sum / Neg / top-level constant-bearing Product
};

// Splits a simplified expression into coeff * core.
inline Term split_term(const Expr& e) {
  if (e.kind() == Expr::Kind::Constant) return {e.value(), Expr::constant(1.0)};
  if (e.kind() == Expr::Kind::Neg) {
    Term t = split_term(e.kids()[0]);
    t.coeff = -t.coeff;
    return t;
  }
  if (e.kind() == Expr::Kind::Product && !e.kids().empty() &&
      e.kids()[0].kind() == Expr::Kind::Constant) {
    std::vector<Expr> rest(e.kids().begin() + 1, e.kids().end());
    Expr core = rest.size() == 1 ? rest[0]
                                 : detail::NodeAccess::make(Expr::Kind::Product, std::move(rest));
    return {e.kids()[0].value(), core};
  }
  return {1.0, e};
}

inline Expr rebuild_term(double coeff, const Expr& core) {
  if (coeff == 0.0) return Expr::constant(0.0);
  if (core.is_constant(1.0)) return Expr::constant(coeff);
  if (coeff == 1.0) return core;
  std::vector<Expr> factors{Expr::constant(coeff)};
  if (core.kind() == Expr::Kind::Product)
    factors.insert(factors.end(), core.kids().begin(), core.kids().end());
  else
    factors.push_back(core);
  return detail::NodeAccess::make(Expr::Kind::Product, std::move(factors));
}

inline Expr simplify_sum(const std::vector<Expr>& kids) {
  std::vector<Term> terms;
  double c = 0.0;
  auto add_term = [&](const Expr& t) {
    Term s = split_term(t);
    if (s.core.is_constant(1.0)) {
      c += s.coeff;
      return;
    }
    for (auto& existing : terms) {
      if (Expr::compare(existing.core, s.core) == 0) {
        existing.coeff += s.coeff;
        return;
      }
    }
    terms.push_back(s);
  };
  for (const auto& k : kids) {
    if (k.kind() == Expr::Kind::Sum)
      for (const auto& kk : k.kids()) add_term(kk);
    else
      add_term(k);
  }
  std::vector<Expr> out;
  if (c != 0.0) out.push_back(Expr::constant(c));
  std::vector<Term> nonzero;
  for (auto& t : terms)
    if (t.coeff != 0.0) nonzero.push_back(t);
  std::sort(nonzero.begin(), nonzero.end(), [](const Term& a, const Term& b) {
    return Expr::compare(a.core, b.core) < 0;
  });
  for (auto& t : nonzero) out.push_back(rebuild_term(t.coeff, t.core));
  if (out.empty()) return Expr::constant(0.0);
  if (out.size() == 1) return out[0];
  return detail::NodeAccess::make(Expr::Kind::Sum, std::move(out));
}

struct Factor {
  Expr base;
  long long exp;
};

inline Expr simplify_product(const std::vector<Expr>& kids) {
  std::vector<Factor> factors;
  double c = 1.0;
  auto add_factor = [&](const Expr& f, long long mult) {
    auto add = [&](const Expr& base, long long ex) {
      for (auto& existing : factors) {
        if (Expr::compare(existing.base, base) == 0) {
          existing.exp += ex;
          return;
        }
      }
      factors.push_back({base, ex});
    };
    if (f.kind() == Expr::Kind::Power)
      add(f.kids()[0], static_cast<long long>(f.exponent()) * mult);
    else
      add(f, mult);
  };
  std::vector<Expr> queue(kids);
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    Expr f = queue[qi];
    if (f.kind() == Expr::Kind::Constant) {
      c *= f.value();
    } else if (f.kind() == Expr::Kind::Neg) {
      c = -c;
      queue.push_back(f.kids()[0]);
    } else if (f.kind() == Expr::Kind::Product) {
      for (const auto& kk : f.kids()) queue.push_back(kk);
    } else {
      add_factor(f, 1);
    }
  }
  if (c == 0.0) return Expr::constant(0.0);
  std::vector<Factor> kept;
  for (auto& f : factors)
    if (f.exp != 0) kept.push_back(f);
  std::sort(kept.begin(), kept.end(), [](const Factor& a, const Factor& b) {
    int cmp = Expr::compare(a.base, b.base);
    if (cmp) return cmp < 0;
    return a.exp < b.exp;
  });
  std::vector<Expr> out;
  if (c != 1.0 || kept.empty()) out.push_back(Expr::constant(c));
  for (auto& f : kept) {
    if (f.exp < INT32_MIN || f.exp > INT32_MAX)
      throw std::overflow_error("simplify: exponent overflow");
    out.push_back(pow(f.base, static_cast<int>(f.exp)));
  }
  if (out.size() == 1) return out[0];
  return detail::NodeAccess::make(Expr::Kind::Product, std::move(out));
}

inline Expr simplify_node(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant:
    case K::Coord:
      return e;
    case K::Sum: {
      std::vector<Expr> kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids()) kids.push_back(simplify_node(k));
      return simplify_sum(kids);
    }
    case K::Product: {
      std::vector<Expr> kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids()) kids.push_back(simplify_node(k));
      return simplify_product(kids);
    }
    case K::Neg: {
      Expr u = simplify_node(e.kids()[0]);
      return simplify_product({Expr::constant(-1.0), u});
    }
    case K::Quotient: {
      Expr u = simplify_node(e.kids()[0]);
      Expr v = simplify_node(e.kids()[1]);
      if (v.kind() == K::Constant && v.value() != 0.0)
        return simplify_product({Expr::constant(1.0 / v.value()), u});
      if (u.is_constant(0.0)) return Expr::constant(0.0);
      return quotient(u, v);
    }
    case K::Power: {
      Expr u = simplify_node(e.kids()[0]);
      int n = e.exponent();
      if (n == 0) return Expr::constant(1.0);
      if (n == 1) return u;
      if (u.kind() == K::Constant && !(u.value() == 0.0 && n < 0)) {
        std::vector<double> empty;
        return Expr::constant(
            detail::eval_node(pow(Expr::constant(u.value()), n), empty));
      }
      if (u.kind() == K::Power) {
        long long m = static_cast<long long>(u.exponent()) * n;
        if (m >= INT32_MIN && m <= INT32_MAX)
          return pow(u.kids()[0], static_cast<int>(m));
      }
      if (u.kind() == K::Product)
        return simplify_product({pow(u, n)});
      return pow(u, n);
    }
    case K::Sin:
    case K::Cos:
    case K::Exp:
    case K::Log:
    case K::Sqrt: {
      Expr u = simplify_node(e.kids()[0]);
      if (u.kind() == K::Constant) {
        double v = u.value();
        bool foldable = true;
        double r = 0.0;
        switch (e.kind()) {
          case K::Sin: r = std::sin(v); break;
          case K::Cos: r = std::cos(v); break;
          case K::Exp: r = std::exp(v); foldable = std::isfinite(r); break;
          case K::Log: foldable = v > 0.0; if (foldable) r = std::log(v); break;
          case K::Sqrt: foldable = v >= 0.0; if (foldable) r = std::sqrt(v); break;
          default: foldable = false;
        }
        if (foldable) return Expr::constant(r);
      }
      return unary(e.kind(), u);
    }
  }
  throw std::logic_error("simplify: unreachable");
}

}  // namespace detail

inline Expr simplify(const Expr& e) { return detail::simplify_node(e); }

// ---------------------------------------------------------------------------
// Parser.  Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' exponent)?          (right-associative)
//   exponent := '-'? integer ('^' exponent)? | '(' exponent ')'
//   atom   := number | name | name '(' expr ')' | '(' expr ')'
// '^' takes literal integer exponents only.

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const Chart& chart)
      : src_(src), chart_(chart) {}

  Expr parse() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view src_;
  const Chart& chart_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c))
      throw ParseError(std::string("expected '") + c + "' " + what, pos_);
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = e + parse_term();
      else if (accept('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = e * parse_unary();
      else if (accept('/'))
        e = e / parse_unary();
      else
        return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return neg(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return pow(base, parse_exponent());
    return base;
  }

  int parse_exponent() {
    skip_ws();
    if (accept('(')) {
      int n = parse_exponent();
      expect(')', "to close exponent");
      return n;
    }
    bool negative = accept('-');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    if (pos_ == start)
      throw ParseError("expected integer exponent", pos_);
    long long v = 0;
    auto [p, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || v > 1024)
      throw ParseError("exponent out of range", start);
    // right-associative tower of integer exponents
    if (accept('^')) {
      int rhs = parse_exponent();
      long long r = 1;
      long long b = v;
      if (rhs < 0) throw ParseError("negative exponent in tower", pos_);
      for (int i = 0; i < rhs; ++i) {
        r *= b;
        if (r > 1024 || r < -1024)
          throw ParseError("exponent out of range", start);
      }
      v = r;
    }
    return static_cast<int>(negative ? -v : v);
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("expected operand", pos_);
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')', "to close group");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_name();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr parse_number() {
    std::size_t start = pos_;
    double v = 0.0;
    auto [p, ec] =
        std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
    if (ec != std::errc())
      throw ParseError("invalid number literal", start);
    pos_ = static_cast<std::size_t>(p - src_.data());
    return Expr::constant(v);
  }

  Expr parse_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);
    if (peek('(')) {
      ++pos_;
      Expr arg = parse_expr();
      expect(')', "to close function argument");
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      if (name == "exp") return exp(arg);
      if (name == "log") return log(arg);
      if (name == "sqrt") return sqrt(arg);
      throw ParseError("unknown function '" + std::string(name) + "'", start);
    }
    int idx = chart_.index_of(name);
    if (idx < 0)
      throw ParseError("unknown identifier '" + std::string(name) + "'",
                       start);
    return Expr::coord(idx);
  }
};

}  // namespace detail

inline Expr parse(std::string_view src, const Chart& chart) {
  return detail::Parser(src, chart).parse();
}

// Gradient as a vector of expressions.
inline std::vector<Expr> gradient(const Expr& e, int dim) {
  std::vector<Expr> g;
  g.reserve(dim);
  for (int i = 0; i < dim; ++i) g.push_back(simplify(diff(e, i)));
  return g;
}

}  // namespace momsec
