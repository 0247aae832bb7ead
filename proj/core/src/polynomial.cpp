#include "plbif/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace plbif {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_exponent(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0)
    throw ValidationError("bad exponent in monomial '" + std::string(whole) + "'");
  return value;
}

Monomial parse_monomial(std::string_view text) {
  std::string_view whole = text;
  text = trim(text);
  Monomial m;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    if (text.front() == '-') m.coeff = -m.coeff;
    text = trim(text.substr(1));
  }
  if (text.empty()) throw ValidationError("empty monomial in '" + std::string(whole) + "'");
  while (!text.empty()) {
    auto star = text.find('*');
    std::string_view factor = trim(text.substr(0, star));
    text = star == std::string_view::npos ? std::string_view{} : text.substr(star + 1);
    if (factor.empty()) throw ValidationError("empty factor in '" + std::string(whole) + "'");

    std::string_view base = factor;
    int exponent = 1;
    if (auto caret = factor.find('^'); caret != std::string_view::npos) {
      base = trim(factor.substr(0, caret));
      exponent = parse_exponent(trim(factor.substr(caret + 1)), whole);
    }
    if (base == "i") {
      for (int e = 0; e < exponent; ++e) m.coeff *= Complex(0.0, 1.0);
    } else if (base == "s" || base == "s1") {
      m.s1_exp += exponent;
    } else if (base == "s2") {
      m.s2_exp += exponent;
    } else if (base == "z" || base == "z1") {
      m.z1_exp += exponent;
    } else {
      double value = 0.0;
      std::string buf(base);
      std::size_t used = 0;
      try {
        value = std::stod(buf, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != buf.size())
        throw ValidationError("unknown factor '" + buf + "' in '" + std::string(whole) + "'");
      m.coeff *= std::pow(value, exponent);
    }
  }
  return m;
}

Complex ipow(Complex x, int e) {
  Complex r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

CoeffPoly CoeffPoly::parse(std::string_view text) {
  std::vector<Monomial> terms;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto piece = text.substr(start, comma == std::string_view::npos ? text.size() - start : comma - start);
    terms.push_back(parse_monomial(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return CoeffPoly(std::move(terms));
}

bool CoeffPoly::is_zero() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Monomial& m) { return m.coeff == 0.0; });
}

bool CoeffPoly::uses_z1() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const Monomial& m) { return m.z1_exp > 0 && m.coeff != 0.0; });
}

int CoeffPoly::max_z1_exp() const {
  int e = 0;
  for (const auto& m : terms_)
    if (m.coeff != 0.0) e = std::max(e, m.z1_exp);
  return e;
}

int CoeffPoly::max_param_index() const {
  int idx = -1;
  for (const auto& m : terms_) {
    if (m.coeff == 0.0) continue;
    if (m.s1_exp > 0) idx = std::max(idx, 0);
    if (m.s2_exp > 0) idx = std::max(idx, 1);
  }
  return idx;
}

Complex CoeffPoly::eval(const Param& s, Complex z1) const {
  Complex sum = 0.0;
  const Complex s1 = s.dim() > 0 ? s[0] : Complex{};
  const Complex s2 = s.dim() > 1 ? s[1] : Complex{};
  for (const auto& m : terms_) sum += m.coeff * ipow(s1, m.s1_exp) * ipow(s2, m.s2_exp) * ipow(z1, m.z1_exp);
  return sum;
}

std::vector<Complex> CoeffPoly::specialize(const Param& s) const {
  std::vector<Complex> out(static_cast<std::size_t>(max_z1_exp() + 1), Complex{});
  const Complex s1 = s.dim() > 0 ? s[0] : Complex{};
  const Complex s2 = s.dim() > 1 ? s[1] : Complex{};
  for (const auto& m : terms_)
    if (m.coeff != 0.0)
      out[static_cast<std::size_t>(m.z1_exp)] += m.coeff * ipow(s1, m.s1_exp) * ipow(s2, m.s2_exp);
  return out;
}

CoeffPoly CoeffPoly::derivative_z1() const {
  std::vector<Monomial> out;
  for (const auto& m : terms_) {
    if (m.z1_exp == 0 || m.coeff == 0.0) continue;
    out.push_back(Monomial{m.coeff * static_cast<double>(m.z1_exp), m.s1_exp, m.s2_exp, m.z1_exp - 1});
  }
  if (out.empty()) out.push_back(Monomial{0.0, 0, 0, 0});
  return CoeffPoly(std::move(out));
}

std::string CoeffPoly::to_string() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& m : terms_) {
    if (!first) os << ", ";
    first = false;
    const Complex c = m.coeff;
    bool wrote = false;
    if (c.imag() == 0.0) {
      os << c.real();
      wrote = true;
    } else if (c.real() == 0.0) {
      os << c.imag() << "*i";
      wrote = true;
    } else {
      // Two monomials for a genuinely complex coefficient.
      os << c.real();
      auto tail = [&](std::ostream& o) {
        if (m.s1_exp) o << "*s1^" << m.s1_exp;
        if (m.s2_exp) o << "*s2^" << m.s2_exp;
        if (m.z1_exp) o << "*z1^" << m.z1_exp;
      };
      tail(os);
      os << ", " << c.imag() << "*i";
      tail(os);
      continue;
    }
    if (wrote) {
      if (m.s1_exp) os << "*s1^" << m.s1_exp;
      if (m.s2_exp) os << "*s2^" << m.s2_exp;
      if (m.z1_exp) os << "*z1^" << m.z1_exp;
    }
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace plbif
