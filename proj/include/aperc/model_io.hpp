#pragma once

// Plain-text formats for POMDP models and value functions.
//
// Both formats start with a versioned header line. After it, whitespace
// separates tokens and everything from '#' to end of line is a comment.
//
//   aperc-pomdp 1
//   states <S>
//   actions <A>
//   observations <O>
//   discount <gamma>
//   transition     S*A rows of S numbers, row (s, a) holds T(s, a, .)
//   observation    S*A rows of O numbers, row (s', a) holds O(s', a, .)
//   reward         S rows of A numbers
//
//   aperc-value-function 1
//   states <S>
//   vectors <K>
//   K rows: <action> <S coefficients>
//
// Numbers are written in shortest round-trip form, so a written file reads
// back bit-identical.

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aperc/errors.hpp"
#include "aperc/pbvi.hpp"
#include "aperc/pomdp.hpp"

namespace aperc {

inline constexpr std::string_view kPomdpHeader = "aperc-pomdp 1";
inline constexpr std::string_view kValueFunctionHeader = "aperc-value-function 1";

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace detail {

class TokenReader {
 public:
  TokenReader(std::istream& in, std::string_view header) {
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
      if (!saw_header) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto trimmed = std::string_view(line).substr(first);
        while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ')) {
          trimmed.remove_suffix(1);
        }
        if (trimmed != header) {
          throw ParseError("expected header '" + std::string(header) + "'");
        }
        saw_header = true;
        continue;
      }
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(tok);
    }
    if (!saw_header) throw ParseError("missing header '" + std::string(header) + "'");
  }

  const std::string& next(const char* what) {
    if (pos_ >= tokens_.size()) throw ParseError(std::string("unexpected end of file reading ") + what);
    return tokens_[pos_++];
  }

  void expect(std::string_view keyword) {
    const auto& tok = next(std::string(keyword).c_str());
    if (tok != keyword) throw ParseError("expected '" + std::string(keyword) + "', got '" + tok + "'");
  }

  double number(const char* what) {
    const auto& tok = next(what);
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw ParseError(std::string("bad number for ") + what + ": '" + tok + "'");
    }
    return v;
  }

  std::size_t count(const char* what) {
    const auto& tok = next(what);
    std::uint64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw ParseError(std::string("bad count for ") + what + ": '" + tok + "'");
    }
    return static_cast<std::size_t>(v);
  }

  std::vector<double> numbers(std::size_t n, const char* what) {
    std::vector<double> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(number(what));
    return v;
  }

  void expect_end() const {
    if (pos_ != tokens_.size()) throw ParseError("trailing content: '" + tokens_[pos_] + "'");
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Reads a POMDP; rows that violate the probability invariants are rejected
/// with ParseError.
inline Pomdp read_pomdp(std::istream& in) {
  detail::TokenReader r(in, kPomdpHeader);
  r.expect("states");
  const auto ns = r.count("states");
  r.expect("actions");
  const auto na = r.count("actions");
  r.expect("observations");
  const auto no = r.count("observations");
  r.expect("discount");
  const double discount = r.number("discount");
  if (ns == 0 || na == 0 || no == 0) throw ParseError("dimensions must be positive");
  r.expect("transition");
  auto t = r.numbers(ns * na * ns, "transition");
  r.expect("observation");
  auto o = r.numbers(ns * na * no, "observation");
  r.expect("reward");
  auto rew = r.numbers(ns * na, "reward");
  r.expect_end();
  try {
    return Pomdp(ns, na, no, std::move(t), std::move(o), std::move(rew), discount);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid model: ") + e.what());
  }
}

inline void write_pomdp(std::ostream& out, const Pomdp& m) {
  out << kPomdpHeader << '\n';
  out << "states " << m.num_states() << '\n';
  out << "actions " << m.num_actions() << '\n';
  out << "observations " << m.num_observations() << '\n';
  out << "discount " << format_double(m.discount()) << '\n';
  auto rows = [&](std::span<const double> data, std::size_t width) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      out << format_double(data[i]) << ((i + 1) % width == 0 ? '\n' : ' ');
    }
  };
  out << "transition\n";
  rows(m.transition_tensor(), m.num_states());
  out << "observation\n";
  rows(m.observation_tensor(), m.num_observations());
  out << "reward\n";
  rows(m.reward_tensor(), m.num_actions());
}

inline ValueFunction read_value_function(std::istream& in) {
  detail::TokenReader r(in, kValueFunctionHeader);
  r.expect("states");
  const auto ns = r.count("states");
  r.expect("vectors");
  const auto k = r.count("vectors");
  if (ns == 0 || k == 0) throw ParseError("value function needs positive states and vectors");
  std::vector<AlphaVector> alphas;
  alphas.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto action = r.count("action");
    alphas.push_back(AlphaVector{r.numbers(ns, "alpha coefficient"), action});
  }
  r.expect_end();
  return ValueFunction(std::move(alphas));
}

inline void write_value_function(std::ostream& out, const ValueFunction& gamma) {
  out << kValueFunctionHeader << '\n';
  out << "states " << gamma.num_states() << '\n';
  out << "vectors " << gamma.size() << '\n';
  for (const auto& alpha : gamma.alphas()) {
    out << alpha.action;
    for (double c : alpha.coeffs) out << ' ' << format_double(c);
    out << '\n';
  }
}

}  // namespace aperc
