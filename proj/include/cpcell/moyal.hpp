#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <random>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cpcell/error.hpp"

namespace cpcell::moyal {

using Rational = boost::multiprecision::cpp_rational;

/// Exact complex rational re + i im.
struct Coeff {
  Rational re;
  Rational im;

  Coeff() = default;
  Coeff(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}
  Coeff(long r) : re(r) {}

  bool is_zero() const { return re == 0 && im == 0; }
  Coeff operator-() const { return {-re, -im}; }
  friend Coeff operator+(const Coeff& a, const Coeff& b) { return {a.re + b.re, a.im + b.im}; }
  friend Coeff operator-(const Coeff& a, const Coeff& b) { return {a.re - b.re, a.im - b.im}; }
  friend Coeff operator*(const Coeff& a, const Coeff& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend bool operator==(const Coeff& a, const Coeff& b) { return a.re == b.re && a.im == b.im; }
};

/// Monomial key: q-degree, p-degree and power of hbar.
struct Key {
  int q = 0;
  int p = 0;
  int hbar = 0;
  friend auto operator<=>(const Key&, const Key&) = default;
};

/// Finite sum of coef * hbar^k * (monomial in q, p). The product structure is
/// supplied by the derived types.
class Graded {
 public:
  using Terms = std::map<Key, Coeff>;

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Adds c to the coefficient of the key, dropping it when it cancels.
  void add(const Key& key, const Coeff& c);
  Coeff coefficient(const Key& key) const;
  /// Smallest hbar power present, empty for the zero polynomial.
  std::optional<int> lowest_hbar_power() const;
  /// Largest q + p degree present, -1 for the zero polynomial.
  int degree() const;
  bool is_real() const;
  /// Value with hbar substituted.
  std::complex<double> evaluate(double q, double p, double hbar) const;

 protected:
  Terms terms_;
};

/// Phase-space symbol f(q, p), commutative.
class PolySymbol : public Graded {
 public:
  PolySymbol() = default;
  static PolySymbol constant(Coeff c);
  static PolySymbol monomial(int q, int p, Coeff c = 1, int hbar = 0);

  /// Parses text such as `3/2 q^2 p - 1/24 hbar^2 p^3`. Imaginary parts use the
  /// literal `i`, as in `1/2 i hbar` or `(1 + 2 i) q`.
  static PolySymbol parse(const std::string& text);
  std::string to_string() const;

  PolySymbol& operator+=(const PolySymbol& o);
  PolySymbol& operator-=(const PolySymbol& o);
  friend PolySymbol operator+(PolySymbol a, const PolySymbol& b) { return a += b; }
  friend PolySymbol operator-(PolySymbol a, const PolySymbol& b) { return a -= b; }
  friend PolySymbol operator*(const PolySymbol& a, const PolySymbol& b);
  friend PolySymbol operator*(const Coeff& c, const PolySymbol& a);
  friend bool operator==(const PolySymbol& a, const PolySymbol& b) { return a.terms_ == b.terms_; }

  /// d^a/dq^a d^b/dp^b.
  PolySymbol derivative(int a, int b) const;
};

/// Polynomial in the operators q^ and p^, stored as normal-ordered words
/// q^^m p^^n (all q^ to the left), with [q^, p^] = i hbar.
class NCPoly : public Graded {
 public:
  NCPoly() = default;
  static NCPoly identity();
  /// Normal-ordered word q^^m p^^n.
  static NCPoly word(int q, int p, Coeff c = 1, int hbar = 0);
  /// Normal form of an arbitrary word written as a string of 'q' and 'p'.
  static NCPoly from_letters(const std::string& letters);

  std::string to_string() const;

  NCPoly& operator+=(const NCPoly& o);
  NCPoly& operator-=(const NCPoly& o);
  friend NCPoly operator+(NCPoly a, const NCPoly& b) { return a += b; }
  friend NCPoly operator-(NCPoly a, const NCPoly& b) { return a -= b; }
  friend NCPoly operator*(const NCPoly& a, const NCPoly& b);
  friend NCPoly operator*(const Coeff& c, const NCPoly& a);
  friend bool operator==(const NCPoly& a, const NCPoly& b) { return a.terms_ == b.terms_; }
};

/// Moyal star product, the finite series of exp((i hbar / 2)(<-d_q ->d_p - <-d_p ->d_q)).
PolySymbol star(const PolySymbol& f, const PolySymbol& g);
/// (f * g - g * f) / (i hbar).
PolySymbol moyal_bracket(const PolySymbol& f, const PolySymbol& g);
/// d_q f d_p g - d_p f d_q g, so that {q, p} = 1.
PolySymbol poisson_bracket(const PolySymbol& f, const PolySymbol& g);

/// Weyl (fully symmetric) ordering of every monomial, in normal form.
NCPoly weyl_quantize(const PolySymbol& f);
/// Inverse of weyl_quantize.
PolySymbol symb(const NCPoly& a);
/// [A, B] / (i hbar).
NCPoly commutator_over_ihbar(const NCPoly& a, const NCPoly& b);

/// Random normal-ordered operator with 1 to 5 terms of degree at most
/// max_degree, small complex rational coefficients and hbar powers 0 or 1.
NCPoly random_operator(std::mt19937_64& rng, int max_degree);
/// Random real symbol with no hbar dependence.
PolySymbol random_real_symbol(std::mt19937_64& rng, int max_degree);

struct LawReport {
  std::string law;
  std::size_t checked = 0;
  std::size_t failures = 0;
  bool passed() const { return checked > 0 && failures == 0; }
};

/// Checks the correspondence laws with exact rational arithmetic on `pairs`
/// random pairs: symb(AB) = symb(A) * symb(B), symb([A,B]/(i hbar)) = {f,g}_M,
/// antisymmetry, star(f, g) - fg = O(hbar), {f,g}_M - {f,g}_P = O(hbar^2),
/// even hbar powers and reality of the Moyal bracket, and the quantization
/// round trip.
std::vector<LawReport> check_laws(std::size_t pairs, int max_degree, std::uint64_t seed);

}  // namespace cpcell::moyal
