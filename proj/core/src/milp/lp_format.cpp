// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/milp/lp_format.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "hvacdr/error.hpp"
#include "hvacdr/util/format.hpp"

namespace hvacdr::milp {

namespace {

bool valid_name(const std::string& s) {
  if (s.empty() || s.size() > 255) return false;
  const unsigned char c0 = s[0];
  if (std::isdigit(c0) || c0 == '.') return false;
  for (unsigned char c : s) {
    if (std::isalnum(c)) continue;
    if (std::string_view("_!\"#$%&()/,.;?@`'{}|~[]").find(c) == std::string_view::npos) return false;
  }
  return true;
}

std::string num(double v) { return util::format_double17(v); }

void append_terms(std::string& out, const std::vector<Term>& terms, const MilpModel& model) {
  int on_line = 0;
  bool first = true;
  for (const auto& t : terms) {
    if (on_line == 6) {
      out += "\n  ";
      on_line = 0;
    }
    const bool neg = std::signbit(t.coef);
    if (first)
      out += neg ? "- " : "";
    else
      out += neg ? " - " : " + ";
    out += num(std::abs(t.coef)) + ' ' + model.variable(t.var).name;
    first = false;
    ++on_line;
  }
}

}  // namespace

std::string export_lp(const MilpModel& model) {
  std::unordered_set<std::string> seen;
  for (const auto& v : model.variables())
    if (!valid_name(v.name)) throw config_error("variable name '" + v.name + "' is not valid in LP format");
  for (const auto& r : model.constraints()) {
    if (!valid_name(r.name)) throw config_error("row name '" + r.name + "' is not valid in LP format");
    if (!seen.insert(r.name).second) throw config_error("row name collision on '" + r.name + "'");
  }
  if (seen.count("obj")) throw config_error("row name collision with the objective label 'obj'");

  std::string out = "\\ hvacdr model\nMinimize\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < model.num_variables(); ++j)
    if (model.variable(j).objective != 0.0) obj.push_back({j, model.variable(j).objective});
  if (!obj.empty()) {
    out += ' ';
    append_terms(out, obj, model);
  }
  if (model.objective_offset != 0.0)
    out += std::string(std::signbit(model.objective_offset) ? " - " : " + ") + num(std::abs(model.objective_offset));
  out += "\nSubject To\n";
  for (const auto& r : model.constraints()) {
    out += ' ' + r.name + ':';
    if (!r.terms.empty()) {
      out += ' ';
      append_terms(out, r.terms, model);
    }
    out += std::string(" ") + sense_symbol(r.sense) + ' ' + num(r.rhs) + '\n';
  }
  out += "Bounds\n";
  for (const auto& v : model.variables()) {
    if (v.lower == v.upper)
      out += ' ' + v.name + " = " + num(v.lower) + '\n';
    else
      out += ' ' + num(v.lower) + " <= " + v.name + " <= " + num(v.upper) + '\n';
  }
  bool any_binary = false;
  for (const auto& v : model.variables()) {
    if (!v.binary) continue;
    if (!any_binary) out += "Binaries\n";
    any_binary = true;
    out += ' ' + v.name + '\n';
  }
  out += "End\n";
  return out;
}

namespace {

enum class Section { none, objective, constraints, bounds, binaries, end };

std::string lower_copy(std::string_view s) {
  std::string r(s);
  for (auto& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return r;
}

std::optional<std::pair<Section, bool>> section_of(std::string_view line) {
  std::string l = lower_copy(line);
  std::erase_if(l, [](char c) { return c == ' ' || c == '\t'; });
  if (l == "minimize" || l == "minimise" || l == "minimum" || l == "min") return {{Section::objective, false}};
  if (l == "maximize" || l == "maximise" || l == "maximum" || l == "max") return {{Section::objective, true}};
  if (l == "subjectto" || l == "suchthat" || l == "st" || l == "s.t.") return {{Section::constraints, false}};
  if (l == "bounds" || l == "bound") return {{Section::bounds, false}};
  if (l == "binaries" || l == "binary" || l == "bin") return {{Section::binaries, false}};
  if (l == "generals" || l == "general" || l == "gen" || l == "integers")
    throw input_error("general integer columns are not supported");
  if (l == "end") return {{Section::end, false}};
  return std::nullopt;
}

struct Token {
  enum Kind { number, name, plus, minus, colon, le, ge, eq } kind;
  std::string text;
  double value = 0.0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '+') { out.push_back({Token::plus, "+"}); ++i; continue; }
    if (c == '-') { out.push_back({Token::minus, "-"}); ++i; continue; }
    if (c == ':') { out.push_back({Token::colon, ":"}); ++i; continue; }
    if (c == '<' || c == '>' || c == '=') {
      std::size_t j = i + 1;
      while (j < s.size() && (s[j] == '<' || s[j] == '>' || s[j] == '=')) ++j;
      const std::string op(s.substr(i, j - i));
      Token::Kind k;
      if (op == "<=" || op == "=<" || op == "<") k = Token::le;
      else if (op == ">=" || op == "=>" || op == ">") k = Token::ge;
      else if (op == "=") k = Token::eq;
      else throw input_error("bad operator '" + op + "' in LP text");
      out.push_back({k, op});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
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
      Token t{Token::number, std::string(s.substr(i, j - i))};
      t.value = util::parse_double(t.text);
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) &&
           std::string_view("+-:<>=").find(s[j]) == std::string_view::npos)
      ++j;
    std::string word(s.substr(i, j - i));
    const std::string lw = lower_copy(word);
    if (lw == "inf" || lw == "infinity") {
      Token t{Token::number, word};
      t.value = HUGE_VAL;
      out.push_back(std::move(t));
    } else {
      out.push_back({Token::name, std::move(word)});
    }
    i = j;
  }
  return out;
}

struct Parsed {
  std::vector<std::string> order;  // first appearance
  std::unordered_map<std::string, int> id;
  int column(const std::string& name) {
    auto [it, fresh] = id.emplace(name, static_cast<int>(order.size()));
    if (fresh) order.push_back(name);
    return it->second;
  }
};

// Parses `[+|-] [coef] name ...` starting at pos; stops at a sense token or
// the end. Constant terms are accumulated separately.
std::vector<std::pair<int, double>> parse_expr(const std::vector<Token>& tk, std::size_t& pos, Parsed& cols,
                                               double& constant) {
  std::vector<std::pair<int, double>> terms;
  while (pos < tk.size()) {
    const auto k = tk[pos].kind;
    if (k == Token::le || k == Token::ge || k == Token::eq) break;
    double sign = 1.0;
    bool any = false;
    while (pos < tk.size() && (tk[pos].kind == Token::plus || tk[pos].kind == Token::minus)) {
      if (tk[pos].kind == Token::minus) sign = -sign;
      ++pos;
      any = true;
    }
    if (pos >= tk.size()) {
      if (any) throw input_error("dangling sign in LP expression");
      break;
    }
    double coef = 1.0;
    bool has_number = false;
    if (tk[pos].kind == Token::number) {
      coef = tk[pos].value;
      has_number = true;
      ++pos;
    }
    if (pos < tk.size() && tk[pos].kind == Token::name) {
      terms.push_back({cols.column(tk[pos].text), sign * coef});
      ++pos;
    } else if (has_number) {
      constant += sign * coef;
    } else {
      throw input_error("unexpected token '" + (pos < tk.size() ? tk[pos].text : std::string()) + "' in LP text");
    }
  }
  return terms;
}

double parse_signed_number(const std::vector<Token>& tk, std::size_t& pos) {
  double sign = 1.0;
  while (pos < tk.size() && (tk[pos].kind == Token::plus || tk[pos].kind == Token::minus)) {
    if (tk[pos].kind == Token::minus) sign = -sign;
    ++pos;
  }
  if (pos >= tk.size() || tk[pos].kind != Token::number) throw input_error("expected a number in LP text");
  return sign * tk[pos++].value;
}

}  // namespace

MilpModel import_lp(std::string_view text) {
  std::vector<std::string> sec_text[6];
  Section current = Section::none;
  bool maximize = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (auto c = line.find('\\'); c != std::string_view::npos) line = line.substr(0, c);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty()) continue;
    if (auto s = section_of(line)) {
      current = s->first;
      if (current == Section::objective) maximize = s->second;
      if (current == Section::end) break;
      continue;
    }
    if (current == Section::none) throw input_error("LP text has content before the objective section");
    sec_text[static_cast<int>(current)].emplace_back(line);
  }

  Parsed cols;
  // Bounds come first so their order fixes the column numbering.
  struct BoundLine {
    int col;
    std::optional<double> lo, hi;
  };
  std::vector<BoundLine> bounds;
  for (const auto& line : sec_text[static_cast<int>(Section::bounds)]) {
    auto tk = tokenize(line);
    std::size_t pos = 0;
    BoundLine bl{-1, {}, {}};
    auto lw = [&](std::size_t p) { return p < tk.size() && tk[p].kind == Token::name ? lower_copy(tk[p].text) : ""; };
    if (tk.size() == 2 && tk[0].kind == Token::name && lw(1) == "free") {
      bl.col = cols.column(tk[0].text);
      bl.lo = -HUGE_VAL;
      bl.hi = HUGE_VAL;
    } else if (!tk.empty() && tk[0].kind == Token::name) {
      bl.col = cols.column(tk[0].text);
      pos = 1;
      if (pos >= tk.size()) throw input_error("incomplete bound line '" + line + "'");
      const auto op = tk[pos++].kind;
      const double v = parse_signed_number(tk, pos);
      if (op == Token::le) bl.hi = v;
      else if (op == Token::ge) bl.lo = v;
      else if (op == Token::eq) bl.lo = bl.hi = v;
      else throw input_error("bad bound line '" + line + "'");
    } else {
      const double v = parse_signed_number(tk, pos);
      if (pos + 1 >= tk.size() || tk[pos + 1].kind != Token::name) throw input_error("bad bound line '" + line + "'");
      const auto op = tk[pos].kind;
      bl.col = cols.column(tk[pos + 1].text);
      pos += 2;
      if (op == Token::le) bl.lo = v;
      else if (op == Token::ge) bl.hi = v;
      else if (op == Token::eq) bl.lo = bl.hi = v;
      else throw input_error("bad bound line '" + line + "'");
      if (pos < tk.size()) {
        const auto op2 = tk[pos++].kind;
        const double w = parse_signed_number(tk, pos);
        if (op2 == Token::le) bl.hi = w;
        else if (op2 == Token::ge) bl.lo = w;
        else throw input_error("bad bound line '" + line + "'");
      }
    }
    if (pos < tk.size() && !(tk.size() == 2 && lw(1) == "free")) throw input_error("trailing tokens in bound line '" + line + "'");
    bounds.push_back(bl);
  }

  std::string obj_text;
  for (const auto& l : sec_text[static_cast<int>(Section::objective)]) obj_text += l + '\n';
  auto obj_tokens = tokenize(obj_text);
  std::size_t pos = 0;
  if (obj_tokens.size() >= 2 && obj_tokens[0].kind == Token::name && obj_tokens[1].kind == Token::colon) pos = 2;
  double offset = 0.0;
  auto obj_terms = parse_expr(obj_tokens, pos, cols, offset);
  if (pos != obj_tokens.size()) throw input_error("unexpected operator in the objective");

  std::string con_text;
  for (const auto& l : sec_text[static_cast<int>(Section::constraints)]) con_text += l + '\n';
  auto ct = tokenize(con_text);
  struct RowData {
    std::string name;
    std::vector<std::pair<int, double>> terms;
    Sense sense;
    double rhs;
  };
  std::vector<RowData> rows;
  pos = 0;
  while (pos < ct.size()) {
    RowData r;
    if (pos + 1 < ct.size() && ct[pos].kind == Token::name && ct[pos + 1].kind == Token::colon) {
      r.name = ct[pos].text;
      pos += 2;
    } else {
      r.name = "R" + std::to_string(rows.size() + 1);
    }
    double constant = 0.0;
    r.terms = parse_expr(ct, pos, cols, constant);
    if (pos >= ct.size()) throw input_error("row '" + r.name + "' has no sense");
    const auto k = ct[pos++].kind;
    r.sense = k == Token::le ? Sense::le : (k == Token::ge ? Sense::ge : Sense::eq);
    r.rhs = parse_signed_number(ct, pos) - constant;
    rows.push_back(std::move(r));
  }

  std::unordered_set<std::string> binaries;
  for (const auto& l : sec_text[static_cast<int>(Section::binaries)])
    for (const auto& t : tokenize(l)) {
      if (t.kind != Token::name) throw input_error("unexpected token in Binaries");
      cols.column(t.text);
      binaries.insert(t.text);
    }

  const int n = static_cast<int>(cols.order.size());
  std::vector<double> lo(n, 0.0), hi(n, HUGE_VAL);
  for (const auto& name : binaries) hi[cols.id[name]] = 1.0;
  for (const auto& b : bounds) {
    if (b.lo) lo[b.col] = *b.lo;
    if (b.hi) hi[b.col] = *b.hi;
  }
  MilpModel m;
  for (int j = 0; j < n; ++j) {
    const auto& name = cols.order[j];
    if (binaries.count(name)) {
      int k = m.add_binary(name);
      m.variable(k).lower = lo[j];
      m.variable(k).upper = hi[j];
    } else {
      m.add_variable(name, lo[j], hi[j]);
    }
  }
  const double dir = maximize ? -1.0 : 1.0;
  for (auto [j, c] : obj_terms) m.variable(j).objective += dir * c;
  m.objective_offset = dir * offset;
  for (auto& r : rows) {
    std::vector<Term> terms;
    for (auto [j, c] : r.terms) terms.push_back({j, c});
    m.add_constraint(std::move(r.name), std::move(terms), r.sense, r.rhs);
  }
  return m;
}

std::string export_solution(const MilpModel& model, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != model.num_variables()) throw input_error("solution size does not match model");
  std::string out;
  for (int j = 0; j < model.num_variables(); ++j) out += model.variable(j).name + '=' + num(x[j]) + '\n';
  return out;
}

std::vector<double> import_solution(std::string_view text, const MilpModel& model) {
  std::vector<double> x(model.num_variables(), 0.0);
  std::size_t start = 0;
  int line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw input_error("solution line " + std::to_string(line_no) + " lacks '='");
    std::string name(line.substr(0, eq));
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
    x[model.at(name)] = util::parse_double(line.substr(eq + 1));
  }
  return x;
}

bool same_structure(const MilpModel& a, const MilpModel& b) {
  if (a.num_variables() != b.num_variables() || a.num_constraints() != b.num_constraints()) return false;
  if (a.objective_offset != b.objective_offset) return false;
  for (int j = 0; j < a.num_variables(); ++j) {
    const auto& u = a.variable(j);
    const auto& v = b.variable(j);
    if (u.name != v.name || u.lower != v.lower || u.upper != v.upper || u.binary != v.binary ||
        u.objective != v.objective)
      return false;
  }
  for (int i = 0; i < a.num_constraints(); ++i) {
    const auto& r = a.constraint(i);
    const auto& s = b.constraint(i);
    if (r.name != s.name || r.sense != s.sense || r.rhs != s.rhs || r.terms.size() != s.terms.size()) return false;
    for (std::size_t k = 0; k < r.terms.size(); ++k)
      if (r.terms[k].var != s.terms[k].var || r.terms[k].coef != s.terms[k].coef) return false;
  }
  return true;
}

}  // namespace hvacdr::milp
