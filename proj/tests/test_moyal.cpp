#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "cpcell/moyal.hpp"
#include "doctest.h"

using namespace cpcell;
using namespace cpcell::moyal;

namespace {

// Independent normal ordering by repeated rewriting p q -> q p - i hbar.
NCPoly rewrite_word(const std::string& w) {
  static std::map<std::string, NCPoly> memo;
  if (auto it = memo.find(w); it != memo.end()) return it->second;
  const auto pos = w.find("pq");
  NCPoly out;
  if (pos == std::string::npos) {
    const auto qs = static_cast<int>(std::count(w.begin(), w.end(), 'q'));
    out = NCPoly::word(qs, static_cast<int>(w.size()) - qs);
  } else {
    std::string swapped = w;
    swapped[pos] = 'q';
    swapped[pos + 1] = 'p';
    const std::string dropped = w.substr(0, pos) + w.substr(pos + 2);
    out = rewrite_word(swapped);
    const NCPoly rest = rewrite_word(dropped);
    for (const auto& [k, c] : rest.terms()) out.add({k.q, k.p, k.hbar + 1}, c * Coeff(0, -1));
  }
  memo[w] = out;
  return out;
}

// Average of every interleaving of m q's and n p's.
NCPoly symmetrized(int m, int n) {
  NCPoly sum;
  long count = 0;
  std::function<void(std::string, int, int)> rec = [&](std::string w, int a, int b) {
    if (a == 0 && b == 0) {
      sum += rewrite_word(w);
      ++count;
      return;
    }
    if (a > 0) rec(w + 'q', a - 1, b);
    if (b > 0) rec(w + 'p', a, b - 1);
  };
  rec("", m, n);
  return Coeff(Rational(1, count)) * sum;
}

Rational fact(int n) {
  Rational r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

Rational choose(int n, int k) { return fact(n) / (fact(k) * fact(n - k)); }

// Star product from powers of the bidifferential operator, term by term.
PolySymbol star_by_series(const PolySymbol& f, const PolySymbol& g) {
  using Pair = std::pair<PolySymbol, PolySymbol>;
  std::vector<std::pair<Coeff, Pair>> level{{Coeff(1), {f, g}}};
  PolySymbol out;
  Coeff pref(1);
  for (int k = 0; !level.empty(); ++k) {
    for (const auto& [c, pr] : level) out += (c * pref) * (pr.first * pr.second);
    std::vector<std::pair<Coeff, Pair>> next;
    for (const auto& [c, pr] : level) {
      Pair a{pr.first.derivative(1, 0), pr.second.derivative(0, 1)};
      Pair b{pr.first.derivative(0, 1), pr.second.derivative(1, 0)};
      if (!a.first.is_zero() && !a.second.is_zero()) next.push_back({c, a});
      if (!b.first.is_zero() && !b.second.is_zero()) next.push_back({-c, b});
    }
    level = std::move(next);
    // (i hbar / 2)^(k+1) / (k+1)!
    pref = pref * Coeff(0, Rational(1, 2 * (k + 1)));
    for (auto& [c, pr] : level) {
      PolySymbol lifted;
      for (const auto& [key, v] : pr.first.terms()) lifted.add({key.q, key.p, key.hbar + 1}, v);
      pr.first = lifted;
    }
  }
  return out;
}

Coeff random_coeff(std::mt19937_64& rng, bool allow_complex) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 5), coin(0, 3);
  Coeff c(Rational(num(rng), den(rng)));
  if (allow_complex && coin(rng) == 0) c.im = Rational(num(rng), den(rng));
  return c;
}

NCPoly sample_operator(std::mt19937_64& rng, int max_degree) {
  std::uniform_int_distribution<int> deg(0, max_degree), nterms(1, 5), hb(0, 1);
  NCPoly a;
  for (int t = nterms(rng); t > 0; --t) {
    const int d = deg(rng);
    std::uniform_int_distribution<int> split(0, d);
    const int m = split(rng);
    a.add({m, d - m, hb(rng)}, random_coeff(rng, true));
  }
  return a;
}

PolySymbol sample_real_symbol(std::mt19937_64& rng, int max_degree) {
  std::uniform_int_distribution<int> deg(0, max_degree), nterms(1, 5);
  PolySymbol f;
  for (int t = nterms(rng); t > 0; --t) {
    const int d = deg(rng);
    std::uniform_int_distribution<int> split(0, d);
    const int m = split(rng);
    f.add({m, d - m, 0}, random_coeff(rng, false));
  }
  return f;
}

const PolySymbol q = PolySymbol::monomial(1, 0);
const PolySymbol p = PolySymbol::monomial(0, 1);

}  // namespace

TEST_CASE("star product of the coordinates") {
  CHECK(star(q, p) == PolySymbol::parse("q p + 1/2 i hbar"));
  CHECK(star(p, q) == PolySymbol::parse("q p - 1/2 i hbar"));
  CHECK(star(q, p) == symb(NCPoly::word(1, 1)));
  std::mt19937_64 rng(1);
  for (int n = 0; n < 50; ++n) {
    const auto f = symb(sample_operator(rng, 5));
    CHECK(star(f, PolySymbol::constant(1)) == f);
    CHECK(star(PolySymbol::constant(1), f) == f);
  }
}

TEST_CASE("star product agrees with the bidifferential series") {
  std::mt19937_64 rng(2);
  for (int n = 0; n < 60; ++n) {
    const auto f = symb(sample_operator(rng, 4));
    const auto g = symb(sample_operator(rng, 4));
    CHECK(star(f, g) == star_by_series(f, g));
  }
}

TEST_CASE("Moyal and Poisson brackets of reference pairs") {
  CHECK(moyal_bracket(q, p) == PolySymbol::constant(1));
  const auto q2 = PolySymbol::monomial(2, 0), p2 = PolySymbol::monomial(0, 2);
  CHECK(moyal_bracket(q2, p2) == PolySymbol::parse("4 q p"));
  const auto q3 = PolySymbol::monomial(3, 0), p3 = PolySymbol::monomial(0, 3);
  CHECK(moyal_bracket(q3, p3) == PolySymbol::parse("9 q^2 p^2 - 3/2 hbar^2"));
  CHECK(poisson_bracket(q, p) == PolySymbol::constant(1));
  CHECK(poisson_bracket(q3, p3) == PolySymbol::parse("9 q^2 p^2"));
  // H = H(J) with J = p is a constant of motion of J
  const auto h = PolySymbol::parse("2 + 3 p - 1/2 p^2 + p^5");
  CHECK(poisson_bracket(h, p).is_zero());
}

TEST_CASE("Weyl quantization of low monomials") {
  CHECK(weyl_quantize(PolySymbol::parse("q p")) ==
        NCPoly::word(1, 1) + NCPoly::word(0, 0, Coeff(0, Rational(-1, 2)), 1));
  CHECK(weyl_quantize(PolySymbol::parse("q p")) ==
        Coeff(Rational(1, 2)) * (NCPoly::from_letters("qp") + NCPoly::from_letters("pq")));
  CHECK(weyl_quantize(PolySymbol::monomial(4, 0)) == NCPoly::word(4, 0));
  CHECK(weyl_quantize(PolySymbol::parse("q^2 p")) == NCPoly::word(2, 1) + NCPoly::word(1, 0, Coeff(0, -1), 1));
}

TEST_CASE("Weyl quantization equals the average over interleavings") {
  for (int m = 0; m <= 4; ++m)
    for (int n = 0; n + m <= 6; ++n) CHECK(weyl_quantize(PolySymbol::monomial(m, n)) == symmetrized(m, n));
}

TEST_CASE("normal ordering is confluent") {
  for (const char* w : {"pq", "ppqq", "pqpq", "qppq", "pqqpqp", "ppqqpq"}) {
    CHECK(NCPoly::from_letters(w) == rewrite_word(w));
  }
  CHECK(NCPoly::from_letters("pq") == NCPoly::word(1, 1) + NCPoly::word(0, 0, Coeff(0, -1), 1));
}

TEST_CASE("symbols of normal-ordered words") {
  CHECK(symb(NCPoly::word(1, 1)) == PolySymbol::parse("q p + 1/2 i hbar"));
  CHECK(symb(NCPoly::identity()) == PolySymbol::constant(1));
  for (int m = 0; m <= 5; ++m) {
    for (int n = 0; n <= 5; ++n) {
      PolySymbol expected;
      for (int k = 0; k <= std::min(m, n); ++k) {
        // (i hbar / 2)^k k! C(m,k) C(n,k)
        Rational w = fact(k) * choose(m, k) * choose(n, k);
        for (int e = 0; e < k; ++e) w /= 2;
        const Coeff units[4] = {Coeff(1), Coeff(0, 1), Coeff(-1), Coeff(0, -1)};
        expected.add({m - k, n - k, k}, units[k % 4] * Coeff(w));
      }
      CHECK(symb(NCPoly::word(m, n)) == expected);
    }
  }
}

TEST_CASE("quantization round trip on 200 random symbols up to degree 6") {
  std::mt19937_64 rng(4);
  for (int n = 0; n < 200; ++n) {
    const auto a = sample_operator(rng, 6);
    const auto f = symb(a);
    CHECK(symb(weyl_quantize(f)) == f);
    CHECK(weyl_quantize(f) == a);
  }
}

TEST_CASE("algebra laws on 200 random pairs up to degree 5") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 200; ++n) {
    const auto a = sample_operator(rng, 5);
    const auto b = sample_operator(rng, 5);
    const auto fa = symb(a), fb = symb(b);
    CHECK(symb(a * b) == star(fa, fb));
    CHECK(symb(commutator_over_ihbar(a, b)) == moyal_bracket(fa, fb));
    CHECK(moyal_bracket(fa, fb) == Coeff(-1) * moyal_bracket(fb, fa));
  }
}

TEST_CASE("hbar grading of the corrections") {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 200; ++n) {
    const auto f = sample_real_symbol(rng, 5);
    const auto g = sample_real_symbol(rng, 5);
    const auto star_corr = star(f, g) - f * g;
    if (!star_corr.is_zero()) CHECK(*star_corr.lowest_hbar_power() >= 1);
    const auto bracket_corr = moyal_bracket(f, g) - poisson_bracket(f, g);
    if (!bracket_corr.is_zero()) CHECK(*bracket_corr.lowest_hbar_power() >= 2);
    const auto mb = moyal_bracket(f, g);
    for (const auto& [k, c] : mb.terms()) CHECK(k.hbar % 2 == 0);
    CHECK(mb.is_real());
  }
}

TEST_CASE("Poisson bracket satisfies the Jacobi identity") {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 50; ++n) {
    const auto f = sample_real_symbol(rng, 4);
    const auto g = sample_real_symbol(rng, 4);
    const auto h = sample_real_symbol(rng, 4);
    const auto jac = poisson_bracket(f, poisson_bracket(g, h)) + poisson_bracket(g, poisson_bracket(h, f)) +
                     poisson_bracket(h, poisson_bracket(f, g));
    CHECK(jac.is_zero());
    CHECK(poisson_bracket(f, g) == Coeff(-1) * poisson_bracket(g, f));
  }
}

TEST_CASE("symbol text round trip") {
  const auto f = PolySymbol::parse("3/2 q^2 p - 1/24 hbar^2 p^3");
  CHECK(f.to_string() == "3/2 q^2 p - 1/24 hbar^2 p^3");
  CHECK(f.coefficient({2, 1, 0}) == Coeff(Rational(3, 2)));
  CHECK(f.coefficient({0, 3, 2}) == Coeff(Rational(-1, 24)));
  CHECK(PolySymbol::parse("q p + 1/2 i hbar").to_string() == "q p + 1/2 i hbar");
  CHECK(PolySymbol::parse("(1 - 2/3 i) q * p").coefficient({1, 1, 0}) == Coeff(1, Rational(-2, 3)));
  CHECK(PolySymbol::parse("-q").to_string() == "-q");
  CHECK(PolySymbol::parse("q - q").to_string() == "0");
  std::mt19937_64 rng(8);
  for (int n = 0; n < 100; ++n) {
    const auto g = symb(sample_operator(rng, 5));
    CHECK(PolySymbol::parse(g.to_string()) == g);
  }
  for (const char* bad : {"", "q +", "2 x", "1/0 q", "(1 + q)", "q ^"}) {
    CHECK_THROWS_AS(PolySymbol::parse(bad), Error);
  }
}

TEST_CASE("numeric evaluation substitutes hbar") {
  const auto f = star(q, p);
  const auto v = f.evaluate(2.0, 3.0, 0.5);
  CHECK(v.real() == doctest::Approx(6.0));
  CHECK(v.imag() == doctest::Approx(0.25));
}

TEST_CASE("law checker reports every law as holding") {
  const auto reports = check_laws(40, 5, 99);
  CHECK(reports.size() == 8);
  for (const auto& r : reports) {
    CHECK(r.checked == 40);
    CHECK(r.passed());
  }
}
