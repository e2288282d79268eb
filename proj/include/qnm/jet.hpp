#pragma once

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <complex>

namespace qnm {

inline constexpr int kMaxJetSize = 16;

// Truncated power series  a_0 + a_1 e + ... + a_{n-1} e^{n-1}  in a small
// increment e. Arithmetic drops every term of order >= size(). The Taylor
// coefficients of a solution in omega are carried through the transfer
// matrices this way, which makes them exact rather than finite-differenced.
template <typename Scalar>
class Jet {
 public:
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxJetSize, 1>;
  using Real = typename Eigen::NumTraits<Scalar>::Real;

  Jet() : c_(1) { c_.setZero(); }
  explicit Jet(int size, Scalar value = Scalar(0)) : c_(size) {
    assert(size >= 1 && size <= kMaxJetSize);
    c_.setZero();
    c_(0) = value;
  }
  explicit Jet(const Coeffs& c) : c_(c) {}

  // at + e
  static Jet variable(int size, Scalar at) {
    Jet j(size, at);
    if (size > 1) j.c_(1) = Scalar(1);
    return j;
  }

  int size() const { return static_cast<int>(c_.size()); }
  Scalar& operator[](int i) { return c_(i); }
  const Scalar& operator[](int i) const { return c_(i); }
  Scalar value() const { return c_(0); }
  const Coeffs& coeffs() const { return c_; }
  Coeffs& coeffs() { return c_; }

  Jet& operator+=(const Jet& o) { c_ += o.c_; return *this; }
  Jet& operator-=(const Jet& o) { c_ -= o.c_; return *this; }
  Jet& operator*=(Scalar s) { c_ *= s; return *this; }
  Jet& operator+=(Scalar s) { c_(0) += s; return *this; }
  Jet& operator-=(Scalar s) { c_(0) -= s; return *this; }
  Jet& operator*=(const Jet& o) { *this = *this * o; return *this; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { a.c_ = -a.c_; return a; }
  friend Jet operator*(Jet a, Scalar s) { return a *= s; }
  friend Jet operator*(Scalar s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, Scalar s) { return a += s; }
  friend Jet operator+(Scalar s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, Scalar s) { return a -= s; }
  friend Jet operator-(Scalar s, Jet a) { return (-a) += s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    assert(a.size() == b.size());
    const int n = a.size();
    Jet r(n);
    for (int i = 0; i < n; ++i) {
      if (a.c_(i) == Scalar(0)) continue;
      for (int j = 0; i + j < n; ++j) r.c_(i + j) += a.c_(i) * b.c_(j);
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }
  friend Jet operator/(Jet a, Scalar s) { return a *= Scalar(1) / s; }

 private:
  Coeffs c_;
};

template <typename Scalar>
Jet<Scalar> inverse(const Jet<Scalar>& a) {
  const int n = a.size();
  Jet<Scalar> b(n);
  const Scalar inv0 = Scalar(1) / a[0];
  b[0] = inv0;
  for (int k = 1; k < n; ++k) {
    Scalar s(0);
    for (int i = 1; i <= k; ++i) s += a[i] * b[k - i];
    b[k] = -inv0 * s;
  }
  return b;
}

template <typename Scalar>
Jet<Scalar> exp(const Jet<Scalar>& a) {
  using std::exp;
  const int n = a.size();
  Jet<Scalar> b(n);
  b[0] = exp(a[0]);
  for (int k = 1; k < n; ++k) {
    Scalar s(0);
    for (int i = 1; i <= k; ++i) s += Scalar(i) * a[i] * b[k - i];
    b[k] = s / Scalar(k);
  }
  return b;
}

// Principal branch at the expansion point; requires a[0] != 0 when size() > 1.
template <typename Scalar>
Jet<Scalar> sqrt(const Jet<Scalar>& a) {
  using std::sqrt;
  const int n = a.size();
  Jet<Scalar> b(n);
  b[0] = sqrt(a[0]);
  for (int k = 1; k < n; ++k) {
    Scalar s = a[k];
    for (int i = 1; i < k; ++i) s -= b[i] * b[k - i];
    b[k] = s / (Scalar(2) * b[0]);
  }
  return b;
}

// Simultaneous sin/cos via  s' = c a',  c' = -s a'.
template <typename Scalar>
void sincos(const Jet<Scalar>& a, Jet<Scalar>& s, Jet<Scalar>& c) {
  using std::cos;
  using std::sin;
  const int n = a.size();
  s = Jet<Scalar>(n, sin(a[0]));
  c = Jet<Scalar>(n, cos(a[0]));
  for (int k = 1; k < n; ++k) {
    Scalar ss(0), cc(0);
    for (int i = 1; i <= k; ++i) {
      ss += Scalar(i) * a[i] * c[k - i];
      cc += Scalar(i) * a[i] * s[k - i];
    }
    s[k] = ss / Scalar(k);
    c[k] = -cc / Scalar(k);
  }
}

template <typename Scalar>
Jet<Scalar> pow(const Jet<Scalar>& a, int p) {
  Jet<Scalar> r(a.size(), Scalar(1));
  for (int i = 0; i < p; ++i) r = r * a;
  return r;
}

// Change of truncation order: pads with zeros or drops high-order terms.
template <typename Scalar>
Jet<Scalar> resized(const Jet<Scalar>& a, int size) {
  Jet<Scalar> r(size);
  const int m = std::min(size, a.size());
  for (int i = 0; i < m; ++i) r[i] = a[i];
  return r;
}

using CJet = Jet<std::complex<double>>;

}  // namespace qnm
