#include "lps/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace lps {

Polynomial Polynomial::constant(double c) {
  return monomial({0, 0, 0}, c);
}

Polynomial Polynomial::monomial(const std::array<int, 3>& exps, double c) {
  Polynomial p;
  if (c != 0.0) p.terms_.push_back({exps, c});
  return p;
}

Polynomial Polynomial::affine(double c0, const Vec3& g) {
  Polynomial p = constant(c0);
  for (int v = 0; v < 3; ++v) {
    std::array<int, 3> e{0, 0, 0};
    e[v] = 1;
    p += monomial(e, g[v]);
  }
  return p;
}

void Polynomial::compress() {
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
    return a.exponents < b.exponents;
  });
  std::vector<Term> out;
  for (const Term& t : terms_) {
    if (!out.empty() && out.back().exponents == t.exponents)
      out.back().coeff += t.coeff;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const Term& t) { return t.coeff == 0.0; });
  terms_ = std::move(out);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  r += o;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  compress();
  return *this;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  return *this + o * (-1.0);
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r;
  for (const Term& a : terms_)
    for (const Term& b : o.terms_)
      r.terms_.push_back({{a.exponents[0] + b.exponents[0],
                           a.exponents[1] + b.exponents[1],
                           a.exponents[2] + b.exponents[2]},
                          a.coeff * b.coeff});
  r.compress();
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r = *this;
  for (Term& t : r.terms_) t.coeff *= s;
  r.compress();
  return r;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial r;
  for (const Term& t : terms_) {
    if (t.exponents[var] == 0) continue;
    Term d = t;
    d.coeff *= d.exponents[var];
    d.exponents[var] -= 1;
    r.terms_.push_back(d);
  }
  r.compress();
  return r;
}

double Polynomial::evaluate(const Vec3& x) const {
  double s = 0.0;
  for (const Term& t : terms_) {
    double m = t.coeff;
    for (int v = 0; v < 3; ++v)
      for (int k = 0; k < t.exponents[v]; ++k) m *= x[v];
    s += m;
  }
  return s;
}

Vec3 Polynomial::gradient_at(const Vec3& x) const {
  return Vec3(derivative(0).evaluate(x), derivative(1).evaluate(x),
              derivative(2).evaluate(x));
}

int Polynomial::total_degree() const {
  int d = 0;
  for (const Term& t : terms_)
    d = std::max(d, t.exponents[0] + t.exponents[1] + t.exponents[2]);
  return d;
}

std::vector<Polynomial> barycentric_polynomials(int dim) {
  std::vector<Polynomial> l;
  Vec3 g = Vec3::Zero();
  for (int v = 0; v < dim; ++v) g[v] = -1.0;
  l.push_back(Polynomial::affine(1.0, g));
  for (int v = 0; v < dim; ++v) {
    Vec3 e = Vec3::Zero();
    e[v] = 1.0;
    l.push_back(Polynomial::affine(0.0, e));
  }
  return l;
}

std::vector<std::array<int, 3>> monomial_exponents(int dim, int degree) {
  std::vector<std::array<int, 3>> out;
  for (int d = 0; d <= degree; ++d)
    for (int i = d; i >= 0; --i)
      for (int j = d - i; j >= 0; --j) {
        int k = d - i - j;
        if (dim == 2 && k > 0) continue;
        if (dim == 1 && (j > 0 || k > 0)) continue;
        out.push_back({i, j, k});
      }
  return out;
}

double barycentric_monomial_integral(int dim, const std::array<int, 4>& powers) {
  // |ref simplex| = 1/dim!; the dim! factors cancel:
  //   integral = prod(a_i!) / (|a| + dim)!
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  double num = 1.0;
  int total = 0;
  for (int i = 0; i <= dim; ++i) {
    num *= fact(powers[i]);
    total += powers[i];
  }
  return num / fact(total + dim);
}

}  // namespace lps
