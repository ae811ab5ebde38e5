#pragma once

// Conjunctive criteria language used to retrieve models.
//
//   query := "SELECT" "*" "WHERE" "{" [cond (";" cond)*] "}"
//   cond  := path op literal | "FILTER" "(" path op literal ")"
//   path  := ident ("." ident)+
//   op    := "=" | "!=" | "<" | "<=" | ">" | ">=" | "contains"
//
// Keywords are case-insensitive. Strings are double-quoted with \" and \\
// escapes; numbers are decimal; true/false are boolean literals.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dlom/error.hpp"
#include "dlom/schema.hpp"

namespace dlom::query {

enum class Op { kEq, kNe, kLt, kLe, kGt, kGe, kContains };

inline std::string_view op_text(Op op) {
  switch (op) {
    case Op::kEq: return "=";
    case Op::kNe: return "!=";
    case Op::kLt: return "<";
    case Op::kLe: return "<=";
    case Op::kGt: return ">";
    case Op::kGe: return ">=";
    case Op::kContains: return "contains";
  }
  return "?";
}

using Literal = std::variant<std::string, double, bool>;

struct Condition {
  std::string field_path;
  Op op = Op::kEq;
  Literal literal;

  friend bool operator==(const Condition&, const Condition&) = default;
};

// Projection is always all fields.
struct Query {
  std::vector<Condition> conditions;

  friend bool operator==(const Query&, const Query&) = default;
};

// ---------------------------------------------------------------------------
// Field catalog
// ---------------------------------------------------------------------------

enum class FieldType { kString, kNumber, kBool, kStringList };

using FieldValue = std::variant<std::string, double, bool, std::vector<std::string>>;

struct FieldSpec {
  std::string path;
  FieldType type;
  // nullopt when the field is absent on the record (no performance report).
  std::function<std::optional<FieldValue>(const ModelRecord&)> get;
};

namespace detail {

template <typename F>
FieldSpec str(std::string path, F f) {
  return {std::move(path), FieldType::kString,
          [f](const ModelRecord& r) -> std::optional<FieldValue> {
            return FieldValue(std::string(f(r)));
          }};
}

template <typename F>
FieldSpec num(std::string path, F f) {
  return {std::move(path), FieldType::kNumber,
          [f](const ModelRecord& r) -> std::optional<FieldValue> {
            return FieldValue(static_cast<double>(f(r)));
          }};
}

template <typename F>
FieldSpec perf(std::string path, F f) {
  return {std::move(path), FieldType::kNumber,
          [f](const ModelRecord& r) -> std::optional<FieldValue> {
            if (!r.performance) return std::nullopt;
            return FieldValue(static_cast<double>(f(*r.performance)));
          }};
}

inline std::vector<FieldSpec> build_catalog() {
  using R = const ModelRecord&;
  std::vector<FieldSpec> c;
  c.push_back(str("model.id", [](R r) { return r.id; }));
  c.push_back(num("model.created_year", [](R r) { return r.created_year; }));
  c.push_back(num("model.rating_aggregate", [](R r) { return r.rating_aggregate(); }));
  c.push_back(str("model.application_area", [](R r) { return r.application_area; }));
  c.push_back(str("model.purpose", [](R r) { return r.purpose; }));
  c.push_back(num("model.total_cost", [](R r) { return r.total_cost.dollars(); }));
  c.push_back(num("model.num_iot_devices", [](R r) { return r.num_iot_devices; }));
  c.push_back(str("model.provenance", [](R r) { return provenance_name(r.provenance); }));
  for (Objective o : kAllObjectives)
    c.push_back(num("rating." + objective_key(o), [o](R r) { return r.rating[o]; }));

  c.push_back(str("cloud.host_address", [](R r) { return r.cloud.host_address; }));
  c.push_back(num("cloud.response_time_ms", [](R r) { return r.cloud.response_time_ms; }));
  c.push_back({"cloud.shielded_execution", FieldType::kBool,
               [](R r) -> std::optional<FieldValue> {
                 return FieldValue(r.cloud.shielded_execution);
               }});
  c.push_back({"cloud.security_protocols", FieldType::kStringList,
               [](R r) -> std::optional<FieldValue> {
                 return FieldValue(r.cloud.security_protocols);
               }});
  c.push_back(str("cloud.cost_plan", [](R r) { return r.cloud.cost_plan; }));
  c.push_back(str("cloud.backup_address", [](R r) { return r.cloud.backup_address; }));

  c.push_back(str("device.name", [](R r) { return r.device.name; }));
  c.push_back(str("device.cpu", [](R r) { return r.device.cpu; }));
  c.push_back(str("device.gpu", [](R r) { return r.device.gpu; }));
  c.push_back(num("device.memory_mb", [](R r) { return r.device.memory_mb; }));
  c.push_back(num("device.camera_mp", [](R r) { return r.device.camera_mp; }));
  c.push_back(str("device.dl_framework", [](R r) { return r.device.dl_framework; }));
  c.push_back(num("device.price", [](R r) { return r.device.price.dollars(); }));

  c.push_back(str("dln.name", [](R r) { return r.dln.name; }));
  c.push_back(str("dln.training_dataset", [](R r) { return r.dln.training_dataset; }));
  c.push_back(str("dln.activation_fn", [](R r) { return r.dln.activation_fn; }));
  c.push_back(str("dln.loss_fn", [](R r) { return r.dln.loss_fn; }));
  c.push_back(num("dln.num_layers", [](R r) { return r.dln.num_layers; }));
  c.push_back(num("dln.num_inputs", [](R r) { return r.dln.num_inputs; }));
  c.push_back(num("dln.num_outputs", [](R r) { return r.dln.num_outputs; }));

  c.push_back({"optimization.methods", FieldType::kStringList,
               [](R r) -> std::optional<FieldValue> {
                 std::vector<std::string> names;
                 for (OptimizationMethod m : r.optimization.methods)
                   names.emplace_back(method_name(m));
                 return FieldValue(std::move(names));
               }});
  c.push_back(str("optimization.algorithm_notes",
                  [](R r) { return r.optimization.algorithm_notes; }));

  using P = const PerformanceReport&;
  c.push_back(perf("performance.system_latency_ms", [](P p) { return p.system_latency_ms; }));
  c.push_back(
      perf("performance.inference_latency_ms", [](P p) { return p.inference_latency_ms; }));
  c.push_back(perf("performance.accuracy_pct", [](P p) { return p.accuracy_pct; }));
  c.push_back(perf("performance.stability_pct", [](P p) { return p.stability_pct; }));
  c.push_back(perf("performance.avg_power_w", [](P p) { return p.avg_power_w; }));
  c.push_back(perf("performance.throughput_per_s", [](P p) { return p.throughput_per_s; }));
  c.push_back(perf("performance.runtime_memory_mb", [](P p) { return p.runtime_memory_mb; }));
  return c;
}

}  // namespace detail

inline const std::vector<FieldSpec>& field_catalog() {
  static const std::vector<FieldSpec> catalog = detail::build_catalog();
  return catalog;
}

inline const FieldSpec* find_field(std::string_view path) {
  for (const FieldSpec& f : field_catalog())
    if (f.path == path) return &f;
  return nullptr;
}

// Throws kUnknownField or kTypeMismatch.
inline void check_condition(const Condition& c) {
  const FieldSpec* f = find_field(c.field_path);
  if (!f)
    throw Error(ErrorKind::kUnknownField, "unknown field path '" + c.field_path + "'",
                nlohmann::ordered_json{{"field", c.field_path}});
  auto mismatch = [&](const std::string& why) {
    return Error(ErrorKind::kTypeMismatch,
                 "operator '" + std::string(op_text(c.op)) + "' on '" + c.field_path +
                     "': " + why,
                 nlohmann::ordered_json{{"field", c.field_path},
                                        {"operator", std::string(op_text(c.op))}});
  };
  bool lit_str = std::holds_alternative<std::string>(c.literal);
  bool lit_num = std::holds_alternative<double>(c.literal);
  bool lit_bool = std::holds_alternative<bool>(c.literal);
  switch (c.op) {
    case Op::kLt:
    case Op::kLe:
    case Op::kGt:
    case Op::kGe:
      if (f->type != FieldType::kNumber) throw mismatch("ordering requires a numeric field");
      if (!lit_num) throw mismatch("ordering requires a numeric literal");
      return;
    case Op::kContains:
      if (f->type != FieldType::kString && f->type != FieldType::kStringList)
        throw mismatch("contains requires a string field");
      if (!lit_str) throw mismatch("contains requires a string literal");
      return;
    case Op::kEq:
    case Op::kNe:
      if (f->type == FieldType::kStringList) throw mismatch("use contains on list fields");
      if ((f->type == FieldType::kString && !lit_str) ||
          (f->type == FieldType::kNumber && !lit_num) ||
          (f->type == FieldType::kBool && !lit_bool))
        throw mismatch("literal type does not match field type");
      return;
  }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

enum class Tok { kWord, kString, kNumber, kSymbol, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::kWord;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                src_[pos_] == '.'))
          t.text.push_back(advance());
      } else if (c == '"') {
        t.kind = Tok::kString;
        advance();
        for (;;) {
          if (pos_ >= src_.size()) fail(t, "unterminated string literal");
          char d = advance();
          if (d == '"') break;
          if (d == '\\') {
            if (pos_ >= src_.size()) fail(t, "unterminated string literal");
            char e = advance();
            if (e == 'n') t.text.push_back('\n');
            else if (e == 't') t.text.push_back('\t');
            else t.text.push_back(e);
            continue;
          }
          t.text.push_back(d);
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+' || c == '.') && pos_ + 1 < src_.size() &&
                  (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) ||
                   src_[pos_ + 1] == '.'))) {
        t.kind = Tok::kNumber;
        std::size_t start = pos_;
        if (c == '+') {
          advance();
          start = pos_;
        }
        while (pos_ < src_.size()) {
          char d = src_[pos_];
          bool exp_sign = (d == '-' || d == '+') && pos_ > start &&
                          (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E');
          if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == 'e' ||
              d == 'E' || exp_sign || (d == '-' && pos_ == start)) {
            advance();
          } else {
            break;
          }
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        auto [ptr, ec] =
            std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
          fail(t, "malformed number '" + t.text + "'");
      } else {
        t.kind = Tok::kSymbol;
        std::string_view two = src_.substr(pos_, 2);
        if (two == "<=" || two == ">=" || two == "!=" || two == "==") {
          t.text = std::string(two);
          advance();
          advance();
          if (t.text == "==") t.text = "=";
        } else if (std::string_view("*{}();=<>").find(c) != std::string_view::npos) {
          t.text = std::string(1, advance());
        } else {
          fail(t, std::string("unexpected character '") + c + "'");
        }
      }
      out.push_back(std::move(t));
    }
  }

  [[noreturn]] static void fail(const Token& at, const std::string& what) {
    throw Error(ErrorKind::kSyntax,
                "syntax error at line " + std::to_string(at.line) + ", column " +
                    std::to_string(at.column) + ": " + what,
                nlohmann::ordered_json{{"line", at.line}, {"column", at.column}});
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      advance();
  }
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Query parse() {
    expect_word("SELECT");
    expect_symbol("*");
    expect_word("WHERE");
    expect_symbol("{");
    Query q;
    if (!is_symbol("}")) {
      q.conditions.push_back(condition());
      while (is_symbol(";")) {
        ++pos_;
        // A trailing ';' before '}' is tolerated.
        if (is_symbol("}")) break;
        q.conditions.push_back(condition());
      }
    }
    expect_symbol("}");
    if (cur().kind != Tok::kEnd) Lexer::fail(cur(), "unexpected trailing input");
    return q;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  bool is_symbol(std::string_view s) const {
    return cur().kind == Tok::kSymbol && cur().text == s;
  }
  bool is_word(std::string_view w) const {
    return cur().kind == Tok::kWord && dlom::detail::iequals(cur().text, w);
  }
  void expect_symbol(std::string_view s) {
    if (!is_symbol(s)) Lexer::fail(cur(), "expected '" + std::string(s) + "'" + found());
    ++pos_;
  }
  void expect_word(std::string_view w) {
    if (!is_word(w)) Lexer::fail(cur(), "expected " + std::string(w) + found());
    ++pos_;
  }
  std::string found() const {
    if (cur().kind == Tok::kEnd) return " but reached end of input";
    return " but found '" + cur().text + "'";
  }

  Condition condition() {
    if (is_word("FILTER")) {
      ++pos_;
      expect_symbol("(");
      Condition c = comparison();
      expect_symbol(")");
      return c;
    }
    return comparison();
  }

  Condition comparison() {
    Condition c;
    const Token& path = cur();
    if (path.kind != Tok::kWord || path.text.find('.') == std::string::npos ||
        path.text.front() == '.' || path.text.back() == '.' ||
        path.text.find("..") != std::string::npos)
      Lexer::fail(path, "expected a dotted field path" + found());
    c.field_path = path.text;
    ++pos_;

    const Token& op = cur();
    if (op.kind == Tok::kWord && dlom::detail::iequals(op.text, "contains")) c.op = Op::kContains;
    else if (op.kind == Tok::kSymbol && op.text == "=") c.op = Op::kEq;
    else if (op.kind == Tok::kSymbol && op.text == "!=") c.op = Op::kNe;
    else if (op.kind == Tok::kSymbol && op.text == "<") c.op = Op::kLt;
    else if (op.kind == Tok::kSymbol && op.text == "<=") c.op = Op::kLe;
    else if (op.kind == Tok::kSymbol && op.text == ">") c.op = Op::kGt;
    else if (op.kind == Tok::kSymbol && op.text == ">=") c.op = Op::kGe;
    else Lexer::fail(op, "expected a comparison operator" + found());
    ++pos_;

    const Token& lit = cur();
    if (lit.kind == Tok::kString) c.literal = lit.text;
    else if (lit.kind == Tok::kNumber) c.literal = lit.number;
    else if (lit.kind == Tok::kWord && dlom::detail::iequals(lit.text, "true")) c.literal = true;
    else if (lit.kind == Tok::kWord && dlom::detail::iequals(lit.text, "false")) c.literal = false;
    else Lexer::fail(lit, "expected a literal" + found());
    ++pos_;

    check_condition(c);
    return c;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Query parse_query(std::string_view text) {
  return detail::Parser(detail::Lexer(text).run()).parse();
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

inline std::string print_literal(const Literal& lit) {
  if (const auto* s = std::get_if<std::string>(&lit)) {
    std::string out = "\"";
    for (char c : *s) {
      if (c == '"' || c == '\\') out.push_back('\\');
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      if (c == '\t') {
        out += "\\t";
        continue;
      }
      out.push_back(c);
    }
    return out + "\"";
  }
  if (const auto* d = std::get_if<double>(&lit)) return dlom::detail::format_double(*d);
  return std::get<bool>(lit) ? "true" : "false";
}

// Canonical single-line form.
inline std::string print_query(const Query& q) {
  std::string out = "SELECT * WHERE { ";
  for (std::size_t i = 0; i < q.conditions.size(); ++i) {
    const Condition& c = q.conditions[i];
    if (i > 0) out += " ; ";
    out += c.field_path + " " + std::string(op_text(c.op)) + " " + print_literal(c.literal);
  }
  if (!q.conditions.empty()) out += " ";
  return out + "}";
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

inline bool matches(const Condition& c, const ModelRecord& r) {
  const FieldSpec* f = find_field(c.field_path);
  if (!f) return false;
  std::optional<FieldValue> value = f->get(r);
  if (!value) return false;

  if (const auto* list = std::get_if<std::vector<std::string>>(&*value)) {
    const auto* needle = std::get_if<std::string>(&c.literal);
    return c.op == Op::kContains && needle &&
           std::find(list->begin(), list->end(), *needle) != list->end();
  }
  if (const auto* s = std::get_if<std::string>(&*value)) {
    const auto* lit = std::get_if<std::string>(&c.literal);
    if (!lit) return false;
    switch (c.op) {
      case Op::kEq: return *s == *lit;
      case Op::kNe: return *s != *lit;
      case Op::kContains: return s->find(*lit) != std::string::npos;
      default: return false;
    }
  }
  if (const auto* b = std::get_if<bool>(&*value)) {
    const auto* lit = std::get_if<bool>(&c.literal);
    if (!lit) return false;
    if (c.op == Op::kEq) return *b == *lit;
    if (c.op == Op::kNe) return *b != *lit;
    return false;
  }
  double v = std::get<double>(*value);
  const auto* lit = std::get_if<double>(&c.literal);
  if (!lit) return false;
  switch (c.op) {
    case Op::kEq: return v == *lit;
    case Op::kNe: return v != *lit;
    case Op::kLt: return v < *lit;
    case Op::kLe: return v <= *lit;
    case Op::kGt: return v > *lit;
    case Op::kGe: return v >= *lit;
    case Op::kContains: return false;
  }
  return false;
}

inline bool matches(const Query& q, const ModelRecord& r) {
  return std::all_of(q.conditions.begin(), q.conditions.end(),
                     [&](const Condition& c) { return matches(c, r); });
}

// Models satisfying every condition, in input order.
inline std::vector<ModelRecord> evaluate(const Query& q, std::span<const ModelRecord> models) {
  for (const Condition& c : q.conditions) check_condition(c);
  std::vector<ModelRecord> out;
  for (const ModelRecord& m : models)
    if (matches(q, m)) out.push_back(m);
  return out;
}

}  // namespace dlom::query
