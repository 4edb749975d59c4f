#include "cpcell/moyal.hpp"

namespace cpcell::moyal {
namespace {

Coeff random_coeff(std::mt19937_64& rng, bool complex) {
  std::uniform_int_distribution<long> num(-9, 9), den(1, 9);
  Rational re(num(rng), den(rng));
  Rational im = complex ? Rational(num(rng), den(rng)) : Rational(0);
  if (re == 0 && im == 0) re = 1;
  return {re, im};
}

}  // namespace

NCPoly random_operator(std::mt19937_64& rng, int max_degree) {
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

PolySymbol random_real_symbol(std::mt19937_64& rng, int max_degree) {
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

std::vector<LawReport> check_laws(std::size_t pairs, int max_degree, std::uint64_t seed) {
  std::vector<LawReport> out{{"homomorphism symb(AB) = symb(A) * symb(B)"},
                             {"commutator symb([A,B]/(i hbar)) = Moyal bracket"},
                             {"antisymmetry of the Moyal bracket"},
                             {"star(f,g) - fg starts at hbar^1"},
                             {"Moyal - Poisson bracket starts at hbar^2"},
                             {"Moyal bracket has only even hbar powers"},
                             {"Moyal bracket of real symbols is real"},
                             {"quantization round trip symb(weyl(f)) = f"}};
  auto record = [&](std::size_t law, bool ok) {
    ++out[law].checked;
    if (!ok) ++out[law].failures;
  };
  std::mt19937_64 rng(seed);
  for (std::size_t n = 0; n < pairs; ++n) {
    const NCPoly a = random_operator(rng, max_degree);
    const NCPoly b = random_operator(rng, max_degree);
    const PolySymbol fa = symb(a), fb = symb(b);
    const PolySymbol bracket = moyal_bracket(fa, fb);
    record(0, symb(a * b) == star(fa, fb));
    record(1, symb(commutator_over_ihbar(a, b)) == bracket);
    record(2, bracket == Coeff(-1) * moyal_bracket(fb, fa));
    record(7, symb(weyl_quantize(fa)) == fa && weyl_quantize(fa) == a);

    const PolySymbol f = random_real_symbol(rng, max_degree);
    const PolySymbol g = random_real_symbol(rng, max_degree);
    const PolySymbol star_corr = star(f, g) - f * g;
    record(3, star_corr.is_zero() || *star_corr.lowest_hbar_power() >= 1);
    const PolySymbol real_bracket = moyal_bracket(f, g);
    const PolySymbol bracket_corr = real_bracket - poisson_bracket(f, g);
    record(4, bracket_corr.is_zero() || *bracket_corr.lowest_hbar_power() >= 2);
    bool even = true;
    for (const auto& [k, c] : real_bracket.terms()) even = even && k.hbar % 2 == 0;
    record(5, even);
    record(6, real_bracket.is_real());
  }
  return out;
}

}  // namespace cpcell::moyal
