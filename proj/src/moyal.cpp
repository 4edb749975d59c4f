#include "cpcell/moyal.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace cpcell::moyal {
namespace {

using boost::multiprecision::cpp_int;

Rational falling(int n, int k) {
  if (k > n) return 0;
  cpp_int r = 1;
  for (int m = 0; m < k; ++m) r *= (n - m);
  return Rational(r);
}

Rational factorial(int n) { return falling(n, n); }

Rational binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  return falling(n, k) / factorial(k);
}

// (i / 2)^k and (-i)^k as exact coefficients
Coeff i_power(int k, const Rational& scale) {
  static const Coeff units[4] = {Coeff(1), Coeff(0, 1), Coeff(-1), Coeff(0, -1)};
  const Coeff u = units[((k % 4) + 4) % 4];
  return {u.re * scale, u.im * scale};
}

Rational half_power(int k) {
  cpp_int d = 1;
  for (int m = 0; m < k; ++m) d *= 2;
  return Rational(cpp_int(1), d);
}

// Divides every coefficient by i and lowers the hbar power by one.
template <class Poly>
Poly divide_by_ihbar(const Poly& a) {
  Poly out;
  for (const auto& [k, c] : a.terms()) {
    if (k.hbar < 1) throw Error(ErrorCode::InvalidArgument, "term without an hbar factor cannot be divided by hbar");
    out.add({k.q, k.p, k.hbar - 1}, Coeff(c.im, -c.re));
  }
  return out;
}

std::string rational_text(const Rational& r) { return r.str(); }

std::string term_text(const Key& k, const Coeff& c, bool first) {
  std::string monomial;
  auto factor = [&](const char* name, int power) {
    if (power == 0) return;
    if (!monomial.empty()) monomial += ' ';
    monomial += name;
    if (power > 1) monomial += "^" + std::to_string(power);
  };
  factor("hbar", k.hbar);
  factor("q", k.q);
  factor("p", k.p);

  bool negative = false;
  std::string coef;
  if (c.im == 0 || c.re == 0) {
    const bool imaginary = c.re == 0;
    Rational mag = imaginary ? c.im : c.re;
    negative = mag < 0;
    if (negative) mag = -mag;
    if (mag != 1) coef = rational_text(mag);
    if (imaginary) coef += coef.empty() ? "i" : " i";
    if (coef.empty() && monomial.empty()) coef = "1";
  } else {
    const Rational im_mag = c.im < 0 ? Rational(-c.im) : c.im;
    coef = "(" + rational_text(c.re) + (c.im < 0 ? " - " : " + ") + rational_text(im_mag) + " i)";
  }
  std::string body = coef;
  if (!monomial.empty()) body += (body.empty() ? "" : " ") + monomial;
  if (first) return (negative ? "-" : "") + body;
  return (negative ? " - " : " + ") + body;
}

template <class Poly>
std::string poly_text(const Poly& a) {
  if (a.is_zero()) return "0";
  std::vector<std::pair<Key, Coeff>> items(a.terms().begin(), a.terms().end());
  std::stable_sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
    const auto& a = x.first;
    const auto& b = y.first;
    if (a.hbar != b.hbar) return a.hbar < b.hbar;
    if (a.q + a.p != b.q + b.p) return a.q + a.p > b.q + b.p;
    return a.q > b.q;
  });
  std::string out;
  for (std::size_t n = 0; n < items.size(); ++n) out += term_text(items[n].first, items[n].second, n == 0);
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  PolySymbol parse() {
    PolySymbol out;
    skip();
    if (eof()) fail("empty symbol");
    bool first = true;
    while (!eof()) {
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected + or -");
      }
      first = false;
      auto [key, c] = term();
      if (sign < 0) c = -c;
      out.add(key, c);
      skip();
    }
    return out;
  }

 private:
  std::pair<Key, Coeff> term() {
    Coeff c(1);
    Key key;
    bool any = false;
    for (;;) {
      skip();
      if (eof()) break;
      const char ch = peek();
      if (std::isdigit(static_cast<unsigned char>(ch))) {
        c = c * Coeff(rational());
      } else if (ch == '(') {
        ++pos_;
        c = c * complex_literal();
      } else if (ch == '*') {
        ++pos_;
        continue;
      } else if (std::isalpha(static_cast<unsigned char>(ch))) {
        std::string name;
        while (!eof() && std::isalpha(static_cast<unsigned char>(peek()))) name += s_[pos_++];
        const int power = exponent();
        if (name == "q") key.q += power;
        else if (name == "p") key.p += power;
        else if (name == "hbar") key.hbar += power;
        else if (name == "i") {
          for (int m = 0; m < power; ++m) c = c * Coeff(0, 1);
        } else {
          fail("unknown symbol '" + name + "'");
        }
      } else {
        break;
      }
      any = true;
    }
    if (!any) fail("empty term");
    return {key, c};
  }

  Coeff complex_literal() {
    Coeff c(0);
    bool first = true;
    for (;;) {
      skip();
      if (eof()) fail("unterminated parenthesis");
      if (peek() == ')') {
        ++pos_;
        break;
      }
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected + or - inside parenthesis");
      }
      first = false;
      Rational r = 1;
      bool have_number = false;
      if (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
        r = rational();
        have_number = true;
        skip();
      }
      if (!eof() && peek() == '*') {
        ++pos_;
        skip();
      }
      if (!eof() && peek() == 'i' && (pos_ + 1 >= s_.size() || !std::isalpha(static_cast<unsigned char>(s_[pos_ + 1])))) {
        ++pos_;
        c = c + Coeff(0, sign * r);
      } else {
        if (!have_number) fail("expected a number");
        c = c + Coeff(sign * r);
      }
    }
    return c;
  }

  Rational rational() {
    const cpp_int num = integer();
    if (!eof() && peek() == '/') {
      ++pos_;
      const cpp_int den = integer();
      if (den == 0) fail("zero denominator");
      return Rational(num, den);
    }
    return Rational(num);
  }

  cpp_int integer() {
    std::string digits;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) digits += s_[pos_++];
    if (digits.empty()) fail("expected digits");
    return cpp_int(digits);
  }

  int exponent() {
    skip();
    if (eof() || peek() != '^') return 1;
    ++pos_;
    skip();
    const cpp_int e = integer();
    if (e > 1000) fail("exponent too large");
    return static_cast<int>(e);
  }

  void skip() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError, what + " at offset " + std::to_string(pos_) + " in '" + s_ + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// p^^b q^^c = sum_k k! C(b,k) C(c,k) (-i hbar)^k q^^(c-k) p^^(b-k)
void add_word_product(NCPoly& out, const Key& a, const Key& b, const Coeff& scale) {
  const int kmax = std::min(a.p, b.q);
  for (int k = 0; k <= kmax; ++k) {
    const Rational w = factorial(k) * binomial(a.p, k) * binomial(b.q, k);
    const Coeff c = scale * i_power(3 * k, w);  // (-i)^k = i^(3k)
    out.add({a.q + b.q - k, a.p + b.p - k, a.hbar + b.hbar + k}, c);
  }
}

NCPoly weyl_monomial(int m, int n) {
  // McCoy: symmetric ordering of q^m p^n equals 2^-m sum_k C(m,k) q^^k p^^n q^^(m-k)
  NCPoly out;
  const Rational norm = half_power(m);
  for (int k = 0; k <= m; ++k) {
    NCPoly left = NCPoly::word(k, n);
    NCPoly right = NCPoly::word(m - k, 0);
    NCPoly prod = left * right;
    out += Coeff(norm * binomial(m, k)) * prod;
  }
  return out;
}

}  // namespace

void Graded::add(const Key& key, const Coeff& c) {
  if (key.q < 0 || key.p < 0 || key.hbar < 0) throw Error(ErrorCode::InvalidArgument, "negative degree");
  if (c.is_zero()) return;
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_.emplace(key, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) terms_.erase(it);
}

Coeff Graded::coefficient(const Key& key) const {
  const auto it = terms_.find(key);
  return it == terms_.end() ? Coeff(0) : it->second;
}

std::optional<int> Graded::lowest_hbar_power() const {
  std::optional<int> low;
  for (const auto& [k, c] : terms_) low = low ? std::min(*low, k.hbar) : k.hbar;
  return low;
}

int Graded::degree() const {
  int d = -1;
  for (const auto& [k, c] : terms_) d = std::max(d, k.q + k.p);
  return d;
}

bool Graded::is_real() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second.im == 0; });
}

std::complex<double> Graded::evaluate(double q, double p, double hbar) const {
  std::complex<double> sum = 0.0;
  for (const auto& [k, c] : terms_) {
    const double mono = std::pow(q, k.q) * std::pow(p, k.p) * std::pow(hbar, k.hbar);
    sum += std::complex<double>(static_cast<double>(c.re), static_cast<double>(c.im)) * mono;
  }
  return sum;
}

PolySymbol PolySymbol::constant(Coeff c) { return monomial(0, 0, std::move(c)); }

PolySymbol PolySymbol::monomial(int q, int p, Coeff c, int hbar) {
  PolySymbol out;
  out.add({q, p, hbar}, c);
  return out;
}

PolySymbol PolySymbol::parse(const std::string& text) { return Parser(text).parse(); }

std::string PolySymbol::to_string() const { return poly_text(*this); }

PolySymbol& PolySymbol::operator+=(const PolySymbol& o) {
  for (const auto& [k, c] : o.terms_) add(k, c);
  return *this;
}

PolySymbol& PolySymbol::operator-=(const PolySymbol& o) {
  for (const auto& [k, c] : o.terms_) add(k, -c);
  return *this;
}

PolySymbol operator*(const PolySymbol& a, const PolySymbol& b) {
  PolySymbol out;
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_) out.add({ka.q + kb.q, ka.p + kb.p, ka.hbar + kb.hbar}, ca * cb);
  return out;
}

PolySymbol operator*(const Coeff& c, const PolySymbol& a) {
  PolySymbol out;
  for (const auto& [k, v] : a.terms_) out.add(k, c * v);
  return out;
}

PolySymbol PolySymbol::derivative(int a, int b) const {
  PolySymbol out;
  for (const auto& [k, c] : terms_) {
    if (k.q < a || k.p < b) continue;
    out.add({k.q - a, k.p - b, k.hbar}, Coeff(falling(k.q, a) * falling(k.p, b)) * c);
  }
  return out;
}

NCPoly NCPoly::identity() { return word(0, 0); }

NCPoly NCPoly::word(int q, int p, Coeff c, int hbar) {
  NCPoly out;
  out.add({q, p, hbar}, c);
  return out;
}

NCPoly NCPoly::from_letters(const std::string& letters) {
  NCPoly out = identity();
  for (char ch : letters) {
    if (ch == 'q') out = out * word(1, 0);
    else if (ch == 'p') out = out * word(0, 1);
    else throw Error(ErrorCode::ParseError, std::string("operator words use only q and p, got '") + ch + "'");
  }
  return out;
}

std::string NCPoly::to_string() const { return poly_text(*this); }

NCPoly& NCPoly::operator+=(const NCPoly& o) {
  for (const auto& [k, c] : o.terms_) add(k, c);
  return *this;
}

NCPoly& NCPoly::operator-=(const NCPoly& o) {
  for (const auto& [k, c] : o.terms_) add(k, -c);
  return *this;
}

NCPoly operator*(const NCPoly& a, const NCPoly& b) {
  NCPoly out;
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_) add_word_product(out, ka, kb, ca * cb);
  return out;
}

NCPoly operator*(const Coeff& c, const NCPoly& a) {
  NCPoly out;
  for (const auto& [k, v] : a.terms_) out.add(k, c * v);
  return out;
}

PolySymbol star(const PolySymbol& f, const PolySymbol& g) {
  PolySymbol out;
  for (const auto& [kf, cf] : f.terms()) {
    for (const auto& [kg, cg] : g.terms()) {
      const Coeff base = cf * cg;
      const int kmax = std::min(kf.q + kf.p, kg.q + kg.p);
      for (int k = 0; k <= kmax; ++k) {
        const Coeff pref = i_power(k, half_power(k) / factorial(k));
        for (int j = 0; j <= k; ++j) {
          // (d_q^(k-j) d_p^j f)(d_p^(k-j) d_q^j g)
          const Rational df = falling(kf.q, k - j) * falling(kf.p, j);
          const Rational dg = falling(kg.p, k - j) * falling(kg.q, j);
          if (df == 0 || dg == 0) continue;
          Rational w = binomial(k, j) * df * dg;
          if (j % 2 == 1) w = -w;
          out.add({kf.q - (k - j) + kg.q - j, kf.p - j + kg.p - (k - j), kf.hbar + kg.hbar + k},
                  base * pref * Coeff(w));
        }
      }
    }
  }
  return out;
}

PolySymbol moyal_bracket(const PolySymbol& f, const PolySymbol& g) {
  return divide_by_ihbar(star(f, g) - star(g, f));
}

PolySymbol poisson_bracket(const PolySymbol& f, const PolySymbol& g) {
  return f.derivative(1, 0) * g.derivative(0, 1) - f.derivative(0, 1) * g.derivative(1, 0);
}

NCPoly weyl_quantize(const PolySymbol& f) {
  NCPoly out;
  for (const auto& [k, c] : f.terms()) {
    NCPoly w = weyl_monomial(k.q, k.p);
    for (const auto& [kw, cw] : w.terms()) out.add({kw.q, kw.p, kw.hbar + k.hbar}, c * cw);
  }
  return out;
}

PolySymbol symb(const NCPoly& a) {
  // The Weyl image of q^m p^n is q^^m p^^n plus words of lower degree, so
  // peeling off the highest-degree word repeatedly inverts the quantization.
  PolySymbol out;
  NCPoly rest = a;
  while (!rest.is_zero()) {
    const auto top = std::max_element(rest.terms().begin(), rest.terms().end(), [](const auto& x, const auto& y) {
      const int dx = x.first.q + x.first.p, dy = y.first.q + y.first.p;
      return dx != dy ? dx < dy : x.first < y.first;
    });
    const Key k = top->first;
    const Coeff c = top->second;
    out.add(k, c);
    NCPoly w = weyl_monomial(k.q, k.p);
    for (const auto& [kw, cw] : w.terms()) rest.add({kw.q, kw.p, kw.hbar + k.hbar}, -(c * cw));
  }
  return out;
}

NCPoly commutator_over_ihbar(const NCPoly& a, const NCPoly& b) { return divide_by_ihbar(a * b - b * a); }

}  // namespace cpcell::moyal
