// Copyright 2026 The qkdplan Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CPLEX-style LP text: Minimize / Subject To / Bounds / Generals / Binaries / End.
//
// Decimal literals cannot carry values such as 1/3, so the writer scales the
// objective and each row by the smallest integer that makes every
// coefficient a terminating decimal. Row scaling changes nothing; the
// objective factor is recorded in a "\ objective_scale K" comment that this
// reader undoes (other readers see a uniformly scaled objective). Bounds that
// do not terminate are written as p/q, which only this reader accepts.
// Every column is listed in the objective, zero or not, so that parsing
// preserves column order.

#pragma once

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qkdplan/milp_model.hpp"
#include "qkdplan/rational.hpp"

namespace qkdplan {

namespace detail {

// Denominator part not made of 2s and 5s.
inline Integer non_decimal_part(const Integer& den) {
  Integer d = den;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) d /= 2;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) d /= 5;
  return d;
}

template <typename It, typename Get>
Integer decimal_scale(It begin, It end, Get get) {
  Integer k = 1;
  for (It it = begin; it != end; ++it) {
    Integer part = non_decimal_part(get(*it).get_den());
    mpz_lcm(k.get_mpz_t(), k.get_mpz_t(), part.get_mpz_t());
  }
  return k;
}

inline bool valid_lp_name(std::string_view name) {
  if (name.empty() || std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '.') {
    return false;
  }
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  }
  return true;
}

class LineWriter {
 public:
  explicit LineWriter(std::ostringstream& out) : out_(out) {}
  void put(const std::string& piece) {
    if (width_ + piece.size() > 200) {
      out_ << "\n  ";
      width_ = 2;
    }
    out_ << piece;
    width_ += piece.size();
  }
  void end_line() {
    out_ << "\n";
    width_ = 0;
  }

 private:
  std::ostringstream& out_;
  std::size_t width_ = 0;
};

inline std::string signed_term(const Rational& coef, const std::string& name, bool first) {
  std::string mag = format_rational(abs(coef));
  if (coef < 0) return (first ? "- " : " - ") + mag + " " + name;
  return (first ? "" : " + ") + mag + " " + name;
}

}  // namespace detail

inline std::string export_lp_format(const MilpModel& model) {
  for (const Column& c : model.columns()) {
    if (!detail::valid_lp_name(c.name)) throw ValidationError("column name not LP-safe: " + c.name);
  }
  for (const Row& r : model.rows()) {
    if (!detail::valid_lp_name(r.name)) throw ValidationError("row name not LP-safe: " + r.name);
  }
  std::ostringstream out;
  detail::LineWriter w(out);
  const Integer obj_scale = detail::decimal_scale(
      model.columns().begin(), model.columns().end(),
      [](const Column& c) -> const Rational& { return c.cost; });
  out << "\\ qkdplan LP export\n";
  if (obj_scale != 1) out << "\\ objective_scale " << obj_scale.get_str() << "\n";

  out << "Minimize\n";
  w.put(" obj:");
  for (std::size_t j = 0; j < model.num_columns(); ++j) {
    const Column& c = model.column(j);
    w.put((j == 0 ? " " : "") + detail::signed_term(c.cost * obj_scale, c.name, j == 0));
  }
  w.end_line();

  out << "Subject To\n";
  for (const Row& r : model.rows()) {
    std::vector<Rational> coefs;
    for (const Term& t : r.terms) coefs.push_back(t.coef);
    coefs.push_back(r.rhs);
    const Integer k = detail::decimal_scale(coefs.begin(), coefs.end(),
                                            [](const Rational& v) -> const Rational& { return v; });
    w.put(" " + r.name + ":");
    if (r.terms.empty()) {
      if (model.num_columns() == 0) throw ValidationError("row " + r.name + " has no columns to name");
      // Zero-term rows still need one variable in most readers.
      w.put(" 0 " + model.column(0).name);
    }
    for (std::size_t t = 0; t < r.terms.size(); ++t) {
      const Term& term = r.terms[t];
      w.put((t == 0 ? " " : "") +
            detail::signed_term(term.coef * k, model.column(term.column).name, t == 0));
    }
    w.put(" " + std::string(sense_symbol(r.sense)) + " " + format_rational(r.rhs * k));
    w.end_line();
  }

  out << "Bounds\n";
  for (const Column& c : model.columns()) {
    if (c.type == VarType::kBinary) continue;
    const bool zero_lower = c.lower && *c.lower == 0;
    if (zero_lower && !c.upper) continue;
    std::string lo = c.lower ? format_rational(*c.lower) : "-inf";
    if (!c.lower && !c.upper) {
      out << " " << c.name << " free\n";
    } else if (!c.upper) {
      out << " " << c.name << " >= " << lo << "\n";
    } else {
      out << " " << lo << " <= " << c.name << " <= " << format_rational(*c.upper) << "\n";
    }
  }

  std::vector<std::string> generals;
  std::vector<std::string> binaries;
  for (const Column& c : model.columns()) {
    if (c.type == VarType::kInteger) generals.push_back(c.name);
    if (c.type == VarType::kBinary) binaries.push_back(c.name);
  }
  if (!generals.empty()) {
    out << "Generals\n";
    for (const auto& n : generals) w.put(" " + n);
    w.end_line();
  }
  if (!binaries.empty()) {
    out << "Binaries\n";
    for (const auto& n : binaries) w.put(" " + n);
    w.end_line();
  }
  out << "End\n";
  return out.str();
}

namespace detail {

struct LpToken {
  enum Kind { kName, kNumber, kOp, kColon, kSign } kind;
  std::string text;
  std::size_t line;
};

inline std::vector<LpToken> lp_tokens(std::string_view s, std::size_t line) {
  std::vector<LpToken> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    return ParseError("line " + std::to_string(line) + ": " + what);
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '+' || c == '-') {
      out.push_back({LpToken::kSign, std::string(1, c), line});
      ++i;
    } else if (c == ':') {
      out.push_back({LpToken::kColon, ":", line});
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      ++i;
      if (i < s.size() && (s[i] == '=' || s[i] == '<' || s[i] == '>')) op.push_back(s[i++]);
      if (op == "<" || op == "<=" || op == "=<") {
        op = "<=";
      } else if (op == ">" || op == ">=" || op == "=>") {
        op = ">=";
      } else if (op != "=") {
        throw fail("bad operator '" + op + "'");
      }
      out.push_back({LpToken::kOp, op, line});
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      if (j < s.size() && s[j] == '/') {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      out.push_back({LpToken::kNumber, std::string(s.substr(i, j - i)), line});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.')) {
        ++j;
      }
      out.push_back({LpToken::kName, std::string(s.substr(i, j - i)), line});
      i = j;
    } else {
      throw fail(std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

inline std::string lower_trim(std::string_view s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::size_t a = t.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = t.find_last_not_of(" \t\r");
  return t.substr(a, b - a + 1);
}

class LpReader {
 public:
  MilpModel read(std::string_view text) {
    enum Section { kNone, kObjective, kConstraints, kBounds, kGenerals, kBinaries, kEnd };
    Section section = kNone;
    std::vector<LpToken> objective;
    std::vector<LpToken> constraints;
    std::vector<std::vector<LpToken>> bound_lines;
    std::vector<LpToken> generals;
    std::vector<LpToken> binaries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool maximize = false;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (auto bs = line.find('\\'); bs != std::string_view::npos) {
        std::string comment = lower_trim(line.substr(bs + 1));
        const std::string key = "objective_scale";
        if (comment.rfind(key, 0) == 0) {
          objective_scale_ = parse_rational(lower_trim(comment.substr(key.size())));
          if (objective_scale_ <= 0) throw ParseError("objective_scale must be positive");
        }
        line = line.substr(0, bs);
      }
      std::string key = lower_trim(line);
      if (key.empty()) continue;
      if (key == "minimize" || key == "minimum" || key == "min") {
        section = kObjective;
        continue;
      }
      if (key == "maximize" || key == "maximum" || key == "max") {
        section = kObjective;
        maximize = true;
        continue;
      }
      if (key == "subject to" || key == "such that" || key == "st" || key == "s.t.") {
        section = kConstraints;
        continue;
      }
      if (key == "bounds" || key == "bound") {
        section = kBounds;
        continue;
      }
      if (key == "generals" || key == "general" || key == "gen" || key == "integers") {
        section = kGenerals;
        continue;
      }
      if (key == "binaries" || key == "binary" || key == "bin") {
        section = kBinaries;
        continue;
      }
      if (key == "end") {
        section = kEnd;
        break;
      }
      auto toks = lp_tokens(line, line_no);
      switch (section) {
        case kNone:
          throw ParseError("line " + std::to_string(line_no) + ": text before the objective");
        case kObjective: objective.insert(objective.end(), toks.begin(), toks.end()); break;
        case kConstraints: constraints.insert(constraints.end(), toks.begin(), toks.end()); break;
        case kBounds: bound_lines.push_back(std::move(toks)); break;
        case kGenerals: generals.insert(generals.end(), toks.begin(), toks.end()); break;
        case kBinaries: binaries.insert(binaries.end(), toks.begin(), toks.end()); break;
        case kEnd: break;
      }
    }
    if (section != kEnd) throw ParseError("missing End section");

    read_objective(objective, maximize);
    read_constraints(constraints);
    for (const auto& bl : bound_lines) read_bound(bl);
    for (const LpToken& t : generals) mark(t, VarType::kInteger);
    for (const LpToken& t : binaries) mark(t, VarType::kBinary);

    MilpModel model;
    for (Column& c : columns_) {
      if (c.type == VarType::kBinary) {
        c.lower = Rational(0);
        c.upper = Rational(1);
      }
      model.add_column(std::move(c));
    }
    for (Row& r : rows_) model.add_row(std::move(r));
    return model;
  }

 private:
  std::size_t column(const std::string& name) {
    auto [it, inserted] = index_.emplace(name, columns_.size());
    if (inserted) {
      Column c;
      c.name = name;
      columns_.push_back(std::move(c));
    }
    return it->second;
  }

  static ParseError error_at(const LpToken& t, const std::string& what) {
    return ParseError("line " + std::to_string(t.line) + ": " + what + " near '" + t.text + "'");
  }

  // Reads "[+|-] [number] name" terms starting at i until a non-term token.
  std::vector<Term> read_terms(const std::vector<LpToken>& toks, std::size_t& i) {
    std::vector<Term> terms;
    while (i < toks.size() && toks[i].kind != LpToken::kOp) {
      Rational coef = 1;
      bool any = false;
      while (i < toks.size() && toks[i].kind == LpToken::kSign) {
        if (toks[i].text == "-") coef = -coef;
        ++i;
        any = true;
      }
      if (i < toks.size() && toks[i].kind == LpToken::kNumber) {
        coef *= parse_rational(toks[i].text);
        ++i;
        any = true;
      }
      if (i >= toks.size() || toks[i].kind != LpToken::kName) {
        if (any) throw error_at(i < toks.size() ? toks[i] : toks.back(), "constant terms are not supported");
        break;
      }
      // A name followed by ':' starts the next constraint.
      if (i + 1 < toks.size() && toks[i + 1].kind == LpToken::kColon) {
        if (any) throw error_at(toks[i], "dangling coefficient");
        break;
      }
      terms.push_back({column(toks[i].text), coef});
      ++i;
    }
    return terms;
  }

  void read_objective(const std::vector<LpToken>& toks, bool maximize) {
    std::size_t i = 0;
    if (toks.size() >= 2 && toks[0].kind == LpToken::kName && toks[1].kind == LpToken::kColon) {
      i = 2;
    }
    auto terms = read_terms(toks, i);
    if (i != toks.size()) throw error_at(toks[i], "unexpected token in objective");
    for (const Term& t : terms) {
      Rational c = t.coef / objective_scale_;
      columns_[t.column].cost += maximize ? Rational(-c) : c;
    }
  }

  void read_constraints(const std::vector<LpToken>& toks) {
    std::size_t i = 0;
    while (i < toks.size()) {
      Row row;
      if (i + 1 < toks.size() && toks[i].kind == LpToken::kName &&
          toks[i + 1].kind == LpToken::kColon) {
        row.name = toks[i].text;
        i += 2;
      } else {
        row.name = "R" + std::to_string(rows_.size() + 1);
      }
      row.terms = read_terms(toks, i);
      if (i >= toks.size() || toks[i].kind != LpToken::kOp) {
        throw error_at(i < toks.size() ? toks[i] : toks.back(), "expected a comparison");
      }
      row.sense = toks[i].text == "<=" ? Sense::kLessEqual
                  : toks[i].text == ">=" ? Sense::kGreaterEqual
                                         : Sense::kEqual;
      ++i;
      Rational sign = 1;
      while (i < toks.size() && toks[i].kind == LpToken::kSign) {
        if (toks[i].text == "-") sign = -sign;
        ++i;
      }
      if (i >= toks.size() || toks[i].kind != LpToken::kNumber) {
        throw error_at(i < toks.size() ? toks[i] : toks.back(), "expected a right-hand side");
      }
      row.rhs = sign * parse_rational(toks[i].text);
      ++i;
      rows_.push_back(std::move(row));
    }
  }

  // Returns nullopt for an infinite value; sets `negative` for -inf.
  static std::optional<Rational> bound_value(const std::vector<LpToken>& toks, std::size_t& i,
                                             bool& negative_infinity) {
    Rational sign = 1;
    while (i < toks.size() && toks[i].kind == LpToken::kSign) {
      if (toks[i].text == "-") sign = -sign;
      ++i;
    }
    if (i >= toks.size()) throw ParseError("truncated bound");
    const LpToken& t = toks[i++];
    if (t.kind == LpToken::kName) {
      std::string low = lower_trim(t.text);
      if (low == "inf" || low == "infinity") {
        negative_infinity = sign < 0;
        return std::nullopt;
      }
      throw error_at(t, "expected a number");
    }
    if (t.kind != LpToken::kNumber) throw error_at(t, "expected a number");
    return sign * parse_rational(t.text);
  }

  static bool is_value_start(const LpToken& t) {
    if (t.kind == LpToken::kNumber || t.kind == LpToken::kSign) return true;
    if (t.kind != LpToken::kName) return false;
    std::string low = lower_trim(t.text);
    return low == "inf" || low == "infinity";
  }

  void read_bound(const std::vector<LpToken>& toks) {
    if (toks.empty()) return;
    std::size_t i = 0;
    std::optional<Rational> first;
    bool has_first = false;
    bool first_neg_inf = false;
    std::string first_op;
    if (is_value_start(toks[0])) {
      first = bound_value(toks, i, first_neg_inf);
      has_first = true;
      if (i >= toks.size() || toks[i].kind != LpToken::kOp) throw error_at(toks[0], "bad bound");
      first_op = toks[i++].text;
    }
    if (i >= toks.size() || toks[i].kind != LpToken::kName) throw error_at(toks[0], "bad bound");
    Column& c = columns_[column(toks[i].text)];
    ++i;
    auto apply = [&](const std::string& op, const std::optional<Rational>& v, bool neg_inf,
                     bool value_on_left) {
      std::string eff = op;
      if (value_on_left && op != "=") eff = op == "<=" ? ">=" : "<=";
      if (eff == "=") {
        if (!v) throw error_at(toks[0], "cannot fix a column at infinity");
        c.lower = v;
        c.upper = v;
      } else if (eff == ">=") {
        c.lower = v ? v : std::nullopt;
        if (!v && !neg_inf) throw error_at(toks[0], "lower bound of +inf");
      } else {
        c.upper = v ? v : std::nullopt;
        if (!v && neg_inf) throw error_at(toks[0], "upper bound of -inf");
      }
    };
    if (has_first) apply(first_op, first, first_neg_inf, true);
    if (i < toks.size() && toks[i].kind == LpToken::kName && lower_trim(toks[i].text) == "free") {
      c.lower = std::nullopt;
      c.upper = std::nullopt;
      ++i;
    } else if (i < toks.size()) {
      if (toks[i].kind != LpToken::kOp) throw error_at(toks[i], "bad bound");
      std::string op = toks[i++].text;
      bool neg_inf = false;
      auto v = bound_value(toks, i, neg_inf);
      apply(op, v, neg_inf, false);
    }
    if (i != toks.size()) throw error_at(toks[i], "trailing tokens in bound");
  }

  void mark(const LpToken& t, VarType type) {
    if (t.kind != LpToken::kName) throw error_at(t, "expected a column name");
    columns_[column(t.text)].type = type;
  }

  Rational objective_scale_ = 1;
  std::vector<Column> columns_;
  std::map<std::string, std::size_t> index_;
  std::vector<Row> rows_;
};

}  // namespace detail

inline MilpModel parse_lp_format(std::string_view text) {
  detail::LpReader reader;
  return reader.read(text);
}

}  // namespace qkdplan
