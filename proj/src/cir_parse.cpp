#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "cvnverify/cir.hpp"

// Text format front end. The format is line- and indentation-structured with
// inline { } maps and [ ] lists on single logical lines; double-quoted scalars
// may continue onto following lines and fold the break into one space.
//
// The parser is strict on syntax (unknown operations, malformed maps, bad
// literals) and permissive on semantic links: undefined names, dangling
// transfer targets and duplicate sids parse fine and are left to the checker.

namespace cvnverify {

namespace {

constexpr const char* kResourceKindNames[] = {"Mutex",     "RwLock",  "Condvar",
                                              "Semaphore", "Channel", "Var",
                                              "Atomic"};

bool is_ident(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

struct Line {
  int no = 0;
  int indent = 0;
  std::string text;  // trimmed content
};

struct Ctx {
  std::vector<ParseError> errors;
  std::vector<std::string> warnings;

  void err(int line, std::string code, std::string msg) {
    errors.push_back(ParseError{line, 0, std::move(code), std::move(msg)});
  }
  void warn(int line, const std::string& msg) {
    warnings.push_back("line " + std::to_string(line) + ": " + msg);
  }
};

// Folds quoted-string continuations and strips comments, producing logical
// lines with their original line numbers.
std::vector<Line> logical_lines(std::string_view text, Ctx& ctx) {
  std::vector<Line> out;
  size_t i = 0;
  int line_no = 1;
  while (i < text.size()) {
    int start_line = line_no;
    std::string buf;
    bool in_string = false;
    bool done = false;
    while (i < text.size() && !done) {
      char c = text[i];
      if (c == '\r') {
        ++i;
        continue;
      }
      if (c == '\n') {
        ++line_no;
        ++i;
        if (in_string) {
          // Continuation of a quoted scalar: fold the break to one space.
          while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
          if (!buf.empty() && buf.back() != ' ') buf += ' ';
          continue;
        }
        done = true;
        continue;
      }
      if (in_string) {
        buf += c;
        if (c == '\\' && i + 1 < text.size() && text[i + 1] != '\n') {
          buf += text[i + 1];
          ++i;
        } else if (c == '"') {
          in_string = false;
        }
        ++i;
        continue;
      }
      if (c == '"') {
        in_string = true;
        buf += c;
        ++i;
        continue;
      }
      if (c == '#') {  // comment to end of line
        while (i < text.size() && text[i] != '\n') ++i;
        continue;
      }
      buf += c;
      ++i;
    }
    if (in_string) {
      ctx.err(start_line, "E010", "unterminated string literal");
    }
    size_t ind = 0;
    while (ind < buf.size() && buf[ind] == ' ') ++ind;
    if (ind < buf.size() && buf[ind] == '\t') {
      ctx.err(start_line, "E011", "tab character in indentation");
    }
    std::string content = trim(buf);
    if (!content.empty()) {
      out.push_back(Line{start_line, static_cast<int>(ind), content});
    }
  }
  return out;
}

// --- inline structures ------------------------------------------------------

// Splits "{ k1: v1, k2: v2 }" into ordered key/value pairs. Values keep their
// raw text; nesting and quotes are respected.
std::optional<std::vector<std::pair<std::string, std::string>>> parse_inline_map(
    const std::string& raw, int line, Ctx& ctx) {
  std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '{' || s.back() != '}') {
    ctx.err(line, "E012", "expected an inline { } map, got: " + s);
    return std::nullopt;
  }
  std::string body = trim(std::string_view(s).substr(1, s.size() - 2));
  std::vector<std::pair<std::string, std::string>> entries;
  if (body.empty()) return entries;

  size_t pos = 0;
  while (pos < body.size()) {
    // key
    size_t colon = std::string::npos;
    int depth = 0;
    bool quoted = false;
    for (size_t j = pos; j < body.size(); ++j) {
      char c = body[j];
      if (quoted) {
        if (c == '\\') ++j;
        else if (c == '"') quoted = false;
        continue;
      }
      if (c == '"') quoted = true;
      else if (c == '{' || c == '[' || c == '(') ++depth;
      else if (c == '}' || c == ']' || c == ')') --depth;
      else if (c == ':' && depth == 0) {
        colon = j;
        break;
      }
    }
    if (colon == std::string::npos) {
      ctx.err(line, "E012", "inline map entry without ':'");
      return std::nullopt;
    }
    std::string key = trim(std::string_view(body).substr(pos, colon - pos));
    // value: up to comma at depth 0
    size_t vstart = colon + 1;
    size_t vend = body.size();
    depth = 0;
    quoted = false;
    for (size_t j = vstart; j < body.size(); ++j) {
      char c = body[j];
      if (quoted) {
        if (c == '\\') ++j;
        else if (c == '"') quoted = false;
        continue;
      }
      if (c == '"') quoted = true;
      else if (c == '{' || c == '[' || c == '(') ++depth;
      else if (c == '}' || c == ']' || c == ')') --depth;
      else if (c == ',' && depth == 0) {
        vend = j;
        break;
      }
    }
    std::string value = trim(std::string_view(body).substr(vstart, vend - vstart));
    if (key.empty()) {
      ctx.err(line, "E012", "inline map entry with empty key");
      return std::nullopt;
    }
    for (const auto& [k, _] : entries) {
      if (k == key) {
        ctx.err(line, "E012", "duplicate key '" + key + "' in inline map");
        return std::nullopt;
      }
    }
    entries.emplace_back(key, value);
    pos = vend + (vend < body.size() ? 1 : 0);
    while (pos < body.size() && body[pos] == ' ') ++pos;
  }
  return entries;
}

// Splits "[a, b, c]" into raw elements.
std::optional<std::vector<std::string>> parse_bracket_list(const std::string& raw,
                                                           int line, Ctx& ctx) {
  std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    ctx.err(line, "E013", "expected an inline [ ] list, got: " + s);
    return std::nullopt;
  }
  std::string body = trim(std::string_view(s).substr(1, s.size() - 2));
  std::vector<std::string> items;
  if (body.empty()) return items;
  size_t pos = 0;
  int depth = 0;
  bool quoted = false;
  size_t start = 0;
  for (pos = 0; pos <= body.size(); ++pos) {
    if (pos == body.size() || (body[pos] == ',' && depth == 0 && !quoted)) {
      items.push_back(trim(std::string_view(body).substr(start, pos - start)));
      start = pos + 1;
      continue;
    }
    char c = body[pos];
    if (quoted) {
      if (c == '\\') ++pos;
      else if (c == '"') quoted = false;
      continue;
    }
    if (c == '"') quoted = true;
    else if (c == '{' || c == '[' || c == '(') ++depth;
    else if (c == '}' || c == ']' || c == ')') --depth;
  }
  return items;
}

std::optional<std::string> unescape_string(const std::string& s, int line, Ctx& ctx) {
  std::string out;
  for (size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    ++i;
    if (i + 1 > s.size() - 1) break;
    switch (s[i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      default:
        ctx.err(line, "E014", std::string("unknown escape '\\") + s[i] + "'");
        return std::nullopt;
    }
  }
  return out;
}

std::optional<Value> parse_literal(const std::string& raw, int line, Ctx& ctx) {
  std::string s = trim(raw);
  if (s.empty()) {
    ctx.err(line, "E014", "expected a literal, got nothing");
    return std::nullopt;
  }
  if (s == "true") return Value::boolean(true);
  if (s == "false") return Value::boolean(false);
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') {
      ctx.err(line, "E014", "malformed string literal: " + s);
      return std::nullopt;
    }
    auto un = unescape_string(s, line, ctx);
    if (!un) return std::nullopt;
    return Value::str(*un);
  }
  char first = s[0];
  if (std::isdigit(static_cast<unsigned char>(first)) || first == '-' || first == '+') {
    bool is_float = s.find('.') != std::string::npos ||
                    s.find('e') != std::string::npos ||
                    s.find('E') != std::string::npos;
    try {
      size_t used = 0;
      if (is_float) {
        double d = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return Value::real(d);
      }
      std::int64_t i = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return Value::integer(i);
    } catch (const std::exception&) {
      ctx.err(line, "E014", "malformed numeric literal: " + s);
      return std::nullopt;
    }
  }
  if (is_ident(s)) return Value::enumerator(s);
  ctx.err(line, "E014", "malformed literal: " + s);
  return std::nullopt;
}

// --- expression parsing -----------------------------------------------------

struct Token {
  enum Kind { Ident, Number, Str, Punct, End } kind = End;
  std::string text;
};

class Tokens {
 public:
  explicit Tokens(std::string_view src) {
    size_t i = 0;
    while (i < src.size()) {
      char c = src[i];
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                  src[j] == '_'))
          ++j;
        toks_.push_back({Token::Ident, std::string(src.substr(i, j - i))});
        i = j;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                  src[j] == '.'))
          ++j;
        toks_.push_back({Token::Number, std::string(src.substr(i, j - i))});
        i = j;
        continue;
      }
      if (c == '"') {
        size_t j = i + 1;
        while (j < src.size() && src[j] != '"') {
          if (src[j] == '\\') ++j;
          ++j;
        }
        if (j >= src.size()) {
          ok_ = false;
          return;
        }
        toks_.push_back({Token::Str, std::string(src.substr(i, j - i + 1))});
        i = j + 1;
        continue;
      }
      static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
      bool matched = false;
      for (const char* op : two) {
        if (src.substr(i, 2) == op) {
          toks_.push_back({Token::Punct, op});
          i += 2;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (std::string("()!<>+-*/").find(c) != std::string::npos) {
        toks_.push_back({Token::Punct, std::string(1, c)});
        ++i;
        continue;
      }
      ok_ = false;
      return;
    }
  }

  bool ok() const { return ok_; }
  size_t pos() const { return pos_; }
  void rewind(size_t p) { pos_ = p; }
  const Token& peek() const {
    static Token end{Token::End, ""};
    return pos_ < toks_.size() ? toks_[pos_] : end;
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size()) ++pos_;
    return t;
  }
  bool accept_punct(const std::string& p) {
    if (peek().kind == Token::Punct && peek().text == p) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool at_end() const { return pos_ >= toks_.size(); }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  bool ok_ = true;
};

std::optional<Expr> parse_aexpr(Tokens& tk);

std::optional<Expr> parse_afact(Tokens& tk) {
  const Token& t = tk.peek();
  if (t.kind == Token::Punct && t.text == "(") {
    size_t save = tk.pos();
    tk.next();
    auto inner = parse_aexpr(tk);
    if (inner && tk.accept_punct(")")) return inner;
    tk.rewind(save);
    return std::nullopt;
  }
  if (t.kind == Token::Punct && t.text == "-") {
    // negative numeric literal
    size_t save = tk.pos();
    tk.next();
    const Token& n = tk.peek();
    if (n.kind == Token::Number) {
      Token num = tk.next();
      if (num.text.find('.') != std::string::npos)
        return Expr::lit(Value::real(-std::stod(num.text)));
      return Expr::lit(Value::integer(-std::stoll(num.text)));
    }
    tk.rewind(save);
    return std::nullopt;
  }
  if (t.kind == Token::Number) {
    Token num = tk.next();
    try {
      if (num.text.find('.') != std::string::npos ||
          num.text.find('e') != std::string::npos ||
          num.text.find('E') != std::string::npos)
        return Expr::lit(Value::real(std::stod(num.text)));
      return Expr::lit(Value::integer(std::stoll(num.text)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (t.kind == Token::Str) {
    Token s = tk.next();
    std::string body = s.text.substr(1, s.text.size() - 2);
    std::string out;
    for (size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '\\' && i + 1 < body.size()) {
        ++i;
        switch (body[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: out += body[i];
        }
      } else {
        out += body[i];
      }
    }
    return Expr::lit(Value::str(out));
  }
  if (t.kind == Token::Ident) {
    Token id = tk.next();
    if (id.text == "true") return Expr::lit(Value::boolean(true));
    if (id.text == "false") return Expr::lit(Value::boolean(false));
    // Bare identifiers stay references; enum literals are resolved against
    // the declarations later.
    return Expr::ref(id.text);
  }
  return std::nullopt;
}

std::optional<Expr> parse_aterm(Tokens& tk) {
  auto lhs = parse_afact(tk);
  if (!lhs) return std::nullopt;
  while (true) {
    if (tk.accept_punct("*")) {
      auto rhs = parse_afact(tk);
      if (!rhs) return std::nullopt;
      lhs = Expr::bin(ArithOp::Mul, std::move(*lhs), std::move(*rhs));
    } else if (tk.accept_punct("/")) {
      auto rhs = parse_afact(tk);
      if (!rhs) return std::nullopt;
      lhs = Expr::bin(ArithOp::Div, std::move(*lhs), std::move(*rhs));
    } else {
      return lhs;
    }
  }
}

std::optional<Expr> parse_aexpr(Tokens& tk) {
  auto lhs = parse_aterm(tk);
  if (!lhs) return std::nullopt;
  while (true) {
    if (tk.accept_punct("+")) {
      auto rhs = parse_aterm(tk);
      if (!rhs) return std::nullopt;
      lhs = Expr::bin(ArithOp::Add, std::move(*lhs), std::move(*rhs));
    } else if (tk.accept_punct("-")) {
      auto rhs = parse_aterm(tk);
      if (!rhs) return std::nullopt;
      lhs = Expr::bin(ArithOp::Sub, std::move(*lhs), std::move(*rhs));
    } else {
      return lhs;
    }
  }
}

std::optional<BoolExpr> parse_bexpr(Tokens& tk);

std::optional<BoolExpr> parse_cmp(Tokens& tk) {
  size_t save = tk.pos();
  auto lhs = parse_aexpr(tk);
  if (!lhs) {
    tk.rewind(save);
    return std::nullopt;
  }
  const Token& t = tk.peek();
  CmpOp op;
  if (t.kind == Token::Punct && t.text == "==") op = CmpOp::Eq;
  else if (t.kind == Token::Punct && t.text == "!=") op = CmpOp::Ne;
  else if (t.kind == Token::Punct && t.text == "<") op = CmpOp::Lt;
  else if (t.kind == Token::Punct && t.text == "<=") op = CmpOp::Le;
  else if (t.kind == Token::Punct && t.text == ">") op = CmpOp::Gt;
  else if (t.kind == Token::Punct && t.text == ">=") op = CmpOp::Ge;
  else {
    tk.rewind(save);
    return std::nullopt;
  }
  tk.next();
  auto rhs = parse_aexpr(tk);
  if (!rhs) {
    tk.rewind(save);
    return std::nullopt;
  }
  return BoolExpr::cmp(op, std::move(*lhs), std::move(*rhs));
}

std::optional<BoolExpr> parse_bfact(Tokens& tk) {
  if (tk.accept_punct("!")) {
    auto arg = parse_bfact(tk);
    if (!arg) return std::nullopt;
    return BoolExpr::negate(std::move(*arg));
  }
  if (auto cmp = parse_cmp(tk)) return cmp;
  size_t save = tk.pos();
  if (tk.accept_punct("(")) {
    auto inner = parse_bexpr(tk);
    if (inner && tk.accept_punct(")")) return inner;
    tk.rewind(save);
  }
  const Token& t = tk.peek();
  if (t.kind == Token::Ident && t.text == "true") {
    tk.next();
    return BoolExpr::truec();
  }
  if (t.kind == Token::Ident && t.text == "false") {
    tk.next();
    return BoolExpr::falsec();
  }
  return std::nullopt;
}

std::optional<BoolExpr> parse_bterm(Tokens& tk) {
  auto lhs = parse_bfact(tk);
  if (!lhs) return std::nullopt;
  while (tk.accept_punct("&&")) {
    auto rhs = parse_bfact(tk);
    if (!rhs) return std::nullopt;
    lhs = BoolExpr::conj(std::move(*lhs), std::move(*rhs));
  }
  return lhs;
}

std::optional<BoolExpr> parse_bexpr(Tokens& tk) {
  auto lhs = parse_bterm(tk);
  if (!lhs) return std::nullopt;
  while (tk.accept_punct("||")) {
    auto rhs = parse_bterm(tk);
    if (!rhs) return std::nullopt;
    lhs = BoolExpr::disj(std::move(*lhs), std::move(*rhs));
  }
  return lhs;
}

}  // namespace

std::optional<Expr> parse_value_expr(std::string_view text, std::string& error) {
  Tokens tk(text);
  if (!tk.ok()) {
    error = "unrecognized character in expression";
    return std::nullopt;
  }
  auto e = parse_aexpr(tk);
  if (!e || !tk.at_end()) {
    error = "malformed expression: " + std::string(text);
    return std::nullopt;
  }
  return e;
}

std::optional<BoolExpr> parse_bool_expr(std::string_view text, std::string& error) {
  Tokens tk(text);
  if (!tk.ok()) {
    error = "unrecognized character in expression";
    return std::nullopt;
  }
  auto e = parse_bexpr(tk);
  if (!e || !tk.at_end()) {
    error = "malformed boolean expression: " + std::string(text);
    return std::nullopt;
  }
  return e;
}

namespace {

// --- operations -------------------------------------------------------------

struct OpSpec {
  const char* name;
  OpKind kind;
  int args;
};

constexpr OpSpec kOps[] = {
    {"lock", OpKind::Lock, 1},        {"drop", OpKind::Drop, 1},
    {"unlock", OpKind::Drop, 1},      {"read_lock", OpKind::ReadLock, 1},
    {"write_lock", OpKind::WriteLock, 1},
    {"wait", OpKind::Wait, 2},        {"notify_one", OpKind::NotifyOne, 1},
    {"notify_all", OpKind::NotifyAll, 1},
    {"acquire", OpKind::Acquire, 1},  {"release", OpKind::Release, 1},
    {"send", OpKind::Send, 1},        {"recv", OpKind::Recv, 1},
    {"read", OpKind::Read, 1},        {"write", OpKind::Write, 2},
    {"load", OpKind::Load, 1},        {"store", OpKind::Store, 2},
    {"cas", OpKind::Cas, 3},          {"spawn", OpKind::Spawn, 1},
    {"join", OpKind::Join, 1},        {"spawn_async", OpKind::SpawnAsync, 1},
    {"await", OpKind::Await, 1},      {"call", OpKind::Call, 1},
    {"nop", OpKind::Nop, 0},
};

std::optional<Operation> parse_op(const std::string& raw, int line, Ctx& ctx) {
  std::string s = trim(raw);
  std::string name = s;
  std::string args_raw;
  size_t paren = s.find('(');
  if (paren != std::string::npos) {
    if (s.back() != ')') {
      ctx.err(line, "E015", "malformed operation: " + s);
      return std::nullopt;
    }
    name = trim(std::string_view(s).substr(0, paren));
    args_raw = std::string(std::string_view(s).substr(paren + 1, s.size() - paren - 2));
  }
  const OpSpec* spec = nullptr;
  for (const auto& o : kOps) {
    if (name == o.name) {
      spec = &o;
      break;
    }
  }
  if (spec == nullptr) {
    ctx.err(line, "E015", "unknown operation '" + name + "'");
    return std::nullopt;
  }
  std::vector<std::string> args;
  if (!trim(args_raw).empty()) {
    // split at top-level commas (expressions contain no commas, but be safe
    // around parens and strings anyway)
    int depth = 0;
    bool quoted = false;
    size_t start = 0;
    for (size_t i = 0; i <= args_raw.size(); ++i) {
      if (i == args_raw.size() || (args_raw[i] == ',' && depth == 0 && !quoted)) {
        args.push_back(trim(std::string_view(args_raw).substr(start, i - start)));
        start = i + 1;
        continue;
      }
      char c = args_raw[i];
      if (quoted) {
        if (c == '\\') ++i;
        else if (c == '"') quoted = false;
        continue;
      }
      if (c == '"') quoted = true;
      else if (c == '(') ++depth;
      else if (c == ')') --depth;
    }
  }
  if (static_cast<int>(args.size()) != spec->args) {
    ctx.err(line, "E015",
            "operation '" + name + "' expects " + std::to_string(spec->args) +
                " argument(s), got " + std::to_string(args.size()));
    return std::nullopt;
  }

  Operation op;
  op.kind = spec->kind;
  auto ident_arg = [&](const std::string& a) -> bool {
    if (!is_ident(a)) {
      ctx.err(line, "E015", "operation operand must be an identifier: " + a);
      return false;
    }
    return true;
  };
  switch (op.kind) {
    case OpKind::Nop:
      break;
    case OpKind::Wait:
      if (!ident_arg(args[0]) || !ident_arg(args[1])) return std::nullopt;
      op.target = args[0];
      op.mutex_arg = args[1];
      break;
    case OpKind::Write:
    case OpKind::Store: {
      if (!ident_arg(args[0])) return std::nullopt;
      op.target = args[0];
      std::string err;
      auto e = parse_value_expr(args[1], err);
      if (!e) {
        ctx.err(line, "E015", err);
        return std::nullopt;
      }
      op.value = std::move(*e);
      break;
    }
    case OpKind::Cas: {
      if (!ident_arg(args[0])) return std::nullopt;
      op.target = args[0];
      std::string err;
      auto e1 = parse_value_expr(args[1], err);
      if (!e1) {
        ctx.err(line, "E015", err);
        return std::nullopt;
      }
      auto e2 = parse_value_expr(args[2], err);
      if (!e2) {
        ctx.err(line, "E015", err);
        return std::nullopt;
      }
      op.cas_expected = std::move(*e1);
      op.cas_new = std::move(*e2);
      break;
    }
    default:
      if (!ident_arg(args[0])) return std::nullopt;
      op.target = args[0];
      break;
  }
  return op;
}

// --- statements -------------------------------------------------------------

std::optional<Statement> parse_statement(const std::string& raw, int line, Ctx& ctx,
                                         bool is_last) {
  auto map = parse_inline_map(raw, line, ctx);
  if (!map) return std::nullopt;

  Statement st;
  bool have_sid = false, have_op = false;
  int transfer_keys = 0;
  for (const auto& [key, value] : *map) {
    if (key == "sid") {
      if (!is_ident(value) || value == "ret" || value == "return") {
        ctx.err(line, "E016", "invalid sid '" + value + "'");
        return std::nullopt;
      }
      st.sid = value;
      have_sid = true;
    } else if (key == "op") {
      auto op = parse_op(value, line, ctx);
      if (!op) return std::nullopt;
      st.op = std::move(*op);
      have_op = true;
    } else if (key == "next") {
      ++transfer_keys;
      if (value == "return") {
        st.transfer = Transfer::ret();
      } else if (is_ident(value)) {
        st.transfer = Transfer::to(value);
      } else {
        ctx.err(line, "E016", "invalid transfer target '" + value + "'");
        return std::nullopt;
      }
    } else if (key == "branch") {
      ++transfer_keys;
      auto bmap = parse_inline_map(value, line, ctx);
      if (!bmap) return std::nullopt;
      Transfer t;
      t.kind = Transfer::Kind::Branch;
      for (const auto& [bk, bv] : *bmap) {
        if (bk == "cond") {
          std::string err;
          auto cond = parse_bool_expr(bv, err);
          if (!cond) {
            ctx.err(line, "E016", err);
            return std::nullopt;
          }
          t.cond = std::move(*cond);
        } else if (bk == "true") {
          t.on_true = bv;
        } else if (bk == "false") {
          t.on_false = bv;
        } else {
          ctx.err(line, "E016", "unknown branch key '" + bk + "'");
          return std::nullopt;
        }
      }
      if (!is_ident(t.on_true) || !is_ident(t.on_false)) {
        ctx.err(line, "E016", "branch requires 'true' and 'false' targets");
        return std::nullopt;
      }
      st.transfer = std::move(t);
    } else if (key == "switch") {
      ++transfer_keys;
      auto smap = parse_inline_map(value, line, ctx);
      if (!smap) return std::nullopt;
      Transfer t;
      t.kind = Transfer::Kind::Switch;
      for (const auto& [sk, sv] : *smap) {
        if (sk == "var") {
          if (!is_ident(sv)) {
            ctx.err(line, "E016", "switch var must be an identifier");
            return std::nullopt;
          }
          t.switch_var = sv;
        } else if (sk == "arms") {
          auto amap = parse_inline_map(sv, line, ctx);
          if (!amap) return std::nullopt;
          for (const auto& [ak, av] : *amap) {
            auto lit = parse_literal(ak, line, ctx);
            if (!lit) return std::nullopt;
            if (!is_ident(av)) {
              ctx.err(line, "E016", "switch arm target must be a sid");
              return std::nullopt;
            }
            t.arms.emplace_back(std::move(*lit), av);
          }
        } else if (sk == "default") {
          if (!is_ident(sv)) {
            ctx.err(line, "E016", "switch default target must be a sid");
            return std::nullopt;
          }
          t.switch_default = sv;
        } else {
          ctx.err(line, "E016", "unknown switch key '" + sk + "'");
          return std::nullopt;
        }
      }
      if (t.switch_var.empty() || t.switch_default.empty()) {
        ctx.err(line, "E016", "switch requires 'var' and 'default'");
        return std::nullopt;
      }
      st.transfer = std::move(t);
    } else {
      ctx.warn(line, "unknown statement key '" + key + "' ignored");
    }
  }
  if (!have_sid || !have_op) {
    ctx.err(line, "E016", "statement requires 'sid' and 'op'");
    return std::nullopt;
  }
  if (transfer_keys > 1) {
    ctx.err(line, "E016", "statement has more than one transfer");
    return std::nullopt;
  }
  if (transfer_keys == 0) {
    // No transfer on a trailing statement is shorthand for Return. Elsewhere
    // it stays Omitted, which the checker flags (and can fix).
    st.transfer = is_last ? Transfer::ret() : Transfer{};
  }
  return st;
}

// --- document ---------------------------------------------------------------

struct Section {
  size_t begin = 0, end = 0;  // child line range
};

class DocParser {
 public:
  DocParser(std::vector<Line> lines, Ctx& ctx)
      : lines_(std::move(lines)), ctx_(ctx) {}

  std::optional<CirArtifact> run() {
    walk_top_level();
    desugar_threads();
    if (!ctx_.errors.empty()) return std::nullopt;
    return artifact_;
  }

 private:
  size_t children_end(size_t i) const {
    size_t j = i + 1;
    while (j < lines_.size() && lines_[j].indent > lines_[i].indent) ++j;
    return j;
  }

  void walk_top_level() {
    std::set<std::string> seen;
    size_t i = 0;
    while (i < lines_.size()) {
      const Line& ln = lines_[i];
      size_t end = children_end(i);
      if (ln.indent != 0) {
        ctx_.err(ln.no, "E017", "unexpected indentation at top level");
        i = end;
        continue;
      }
      size_t colon = ln.text.find(':');
      if (colon == std::string::npos) {
        ctx_.err(ln.no, "E017", "expected 'section:' at top level");
        i = end;
        continue;
      }
      std::string key = trim(std::string_view(ln.text).substr(0, colon));
      std::string rest = trim(std::string_view(ln.text).substr(colon + 1));
      if (seen.count(key)) {
        ctx_.err(ln.no, "E017", "duplicate section '" + key + "'");
        i = end;
        continue;
      }
      seen.insert(key);
      if (key == "resources") {
        parse_resources(i + 1, end);
      } else if (key == "protection") {
        parse_protection(rest, ln.no, i + 1, end);
      } else if (key == "threads") {
        threads_present_ = true;
        parse_functions(i + 1, end, /*threads=*/true);
      } else if (key == "functions") {
        parse_functions(i + 1, end, /*threads=*/false);
      } else if (key == "entry") {
        if (!is_ident(rest)) {
          ctx_.err(ln.no, "E017", "entry must name a function");
        } else {
          explicit_entry_ = rest;
        }
      } else if (key == "summaries") {
        parse_summaries(i + 1, end);
      } else if (key == "goals") {
        parse_goals(i + 1, end);
      } else {
        ctx_.warn(ln.no, "unknown section '" + key + "' ignored");
      }
      i = end;
    }
  }

  void parse_resources(size_t begin, size_t end) {
    if (begin >= end) return;
    int level = lines_[begin].indent;
    for (size_t i = begin; i < end; ++i) {
      const Line& ln = lines_[i];
      if (ln.indent != level) {
        ctx_.err(ln.no, "E018", "unexpected nesting in resources");
        continue;
      }
      size_t colon = ln.text.find(':');
      if (colon == std::string::npos) {
        ctx_.err(ln.no, "E018", "expected 'name: { ... }'");
        continue;
      }
      std::string name = trim(std::string_view(ln.text).substr(0, colon));
      std::string rest = trim(std::string_view(ln.text).substr(colon + 1));
      if (!is_ident(name)) {
        ctx_.err(ln.no, "E018", "invalid resource name '" + name + "'");
        continue;
      }
      auto map = parse_inline_map(rest, ln.no, ctx_);
      if (!map) continue;
      parse_resource_decl(name, *map, ln.no);
    }
  }

  void parse_resource_decl(const std::string& name,
                           const std::vector<std::pair<std::string, std::string>>& map,
                           int line) {
    ResourceDecl decl;
    decl.name = name;
    bool have_kind = false, have_init = false, have_type = false;
    std::string init_raw;
    for (const auto& [key, value] : map) {
      if (key == "kind") {
        bool known = false;
        for (size_t k = 0; k < std::size(kResourceKindNames); ++k) {
          if (value == kResourceKindNames[k]) {
            decl.kind = static_cast<ResourceKind>(k);
            known = true;
            break;
          }
        }
        if (!known) {
          ctx_.err(line, "E018", "unknown resource kind '" + value + "'");
          return;
        }
        have_kind = true;
      } else if (key == "paired_with") {
        decl.paired_with = value;
      } else if (key == "init") {
        init_raw = value;
        have_init = true;
      } else if (key == "type") {
        have_type = true;
        if (value == "Bool") decl.value_type = BaseType::Bool;
        else if (value == "Int") decl.value_type = BaseType::Int;
        else if (value == "Float") decl.value_type = BaseType::Float;
        else if (value == "String") decl.value_type = BaseType::String;
        else if (value == "Enum") decl.value_type = BaseType::Enum;
        else {
          ctx_.err(line, "E018", "unknown value type '" + value + "'");
          return;
        }
      } else if (key == "values") {
        auto vals = parse_bracket_list(value, line, ctx_);
        if (!vals) return;
        for (const auto& v : *vals) {
          if (!is_ident(v)) {
            ctx_.err(line, "E018", "enum value must be an identifier: " + v);
            return;
          }
        }
        decl.enum_values = *vals;
      } else {
        ctx_.warn(line, "unknown resource key '" + key + "' ignored");
      }
    }
    if (!have_kind) {
      ctx_.err(line, "E018", "resource '" + name + "' is missing 'kind'");
      return;
    }
    if (decl.kind == ResourceKind::Semaphore ||
        decl.kind == ResourceKind::Channel) {
      if (have_init) {
        auto lit = parse_literal(init_raw, line, ctx_);
        if (!lit) return;
        if (lit->is_top() || lit->type() != BaseType::Int ||
            std::get<std::int64_t>(lit->v) < 0) {
          ctx_.err(line, "E018",
                   "token count init must be a non-negative integer");
          return;
        }
        decl.initial_count = std::get<std::int64_t>(lit->v);
      }
    } else if (decl.kind == ResourceKind::Var || decl.kind == ResourceKind::Atomic) {
      if (!have_init) {
        ctx_.err(line, "E018", "'" + name + "' requires an 'init' value");
        return;
      }
      auto lit = parse_literal(init_raw, line, ctx_);
      if (!lit) return;
      decl.init = *lit;
      BaseType lit_type = lit->type();
      if (!have_type) {
        decl.value_type = lit_type;
      } else if (decl.value_type != lit_type &&
                 !(decl.value_type == BaseType::Enum && lit_type == BaseType::Enum)) {
        ctx_.err(line, "E018",
                 "init literal does not match declared type for '" + name + "'");
        return;
      }
      if (decl.value_type == BaseType::Enum) {
        if (decl.enum_values.empty()) {
          ctx_.err(line, "E018", "enum '" + name + "' requires 'values'");
          return;
        }
        const std::string& iv = std::get<Value::EnumV>(decl.init.v).name;
        if (std::find(decl.enum_values.begin(), decl.enum_values.end(), iv) ==
            decl.enum_values.end()) {
          ctx_.err(line, "E018", "enum init '" + iv + "' not among declared values");
          return;
        }
      } else if (!decl.enum_values.empty()) {
        ctx_.err(line, "E018", "'values' is only meaningful for Enum type");
        return;
      }
    }
    artifact_.resources.push_back(std::move(decl));
  }

  void parse_protection_entry(const std::string& text, int line) {
    size_t colon = text.find(':');
    if (colon == std::string::npos) {
      ctx_.err(line, "E019", "expected 'var: [locks]' in protection");
      return;
    }
    std::string var = trim(std::string_view(text).substr(0, colon));
    std::string rest = trim(std::string_view(text).substr(colon + 1));
    if (!is_ident(var)) {
      ctx_.err(line, "E019", "invalid protection key '" + var + "'");
      return;
    }
    auto locks = parse_bracket_list(rest, line, ctx_);
    if (!locks) return;
    for (const auto& l : *locks) {
      if (!is_ident(l)) {
        ctx_.err(line, "E019", "invalid lock name '" + l + "' in protection");
        return;
      }
    }
    artifact_.protection.emplace_back(var, *locks);
  }

  void parse_protection(const std::string& rest, int line, size_t begin, size_t end) {
    if (!rest.empty()) parse_protection_entry(rest, line);
    for (size_t i = begin; i < end; ++i) {
      parse_protection_entry(lines_[i].text, lines_[i].no);
    }
  }

  void parse_functions(size_t begin, size_t end, bool threads) {
    if (begin >= end) return;
    int level = lines_[begin].indent;
    size_t i = begin;
    while (i < end) {
      const Line& ln = lines_[i];
      size_t sub_end = children_end(i);
      if (ln.indent != level || ln.text.back() != ':') {
        ctx_.err(ln.no, "E020", "expected a function name introducing a block");
        i = sub_end;
        continue;
      }
      std::string name = trim(std::string_view(ln.text).substr(0, ln.text.size() - 1));
      if (!is_ident(name)) {
        ctx_.err(ln.no, "E020", "invalid function name '" + name + "'");
        i = sub_end;
        continue;
      }
      FunctionDef fn;
      fn.name = name;
      parse_function_body(i + 1, sub_end, fn);
      if (threads) thread_names_.push_back(name);
      artifact_.functions.push_back(std::move(fn));
      i = sub_end;
    }
  }

  void parse_function_body(size_t begin, size_t end, FunctionDef& fn) {
    size_t i = begin;
    while (i < end) {
      const Line& ln = lines_[i];
      size_t sub_end = children_end(i);
      size_t colon = ln.text.find(':');
      if (colon == std::string::npos) {
        ctx_.err(ln.no, "E020", "expected 'kind:' or 'body:' in function block");
        i = sub_end;
        continue;
      }
      std::string key = trim(std::string_view(ln.text).substr(0, colon));
      std::string rest = trim(std::string_view(ln.text).substr(colon + 1));
      if (key == "kind") {
        if (rest == "normal") fn.kind = FunctionKind::Normal;
        else if (rest == "async") fn.kind = FunctionKind::Async;
        else if (rest == "closure") fn.kind = FunctionKind::Closure;
        else ctx_.err(ln.no, "E020", "unknown function kind '" + rest + "'");
      } else if (key == "body") {
        // list items may sit at the same indent as the 'body:' key itself
        while (sub_end < end && lines_[sub_end].indent == ln.indent &&
               lines_[sub_end].text.rfind("- ", 0) == 0) {
          sub_end = children_end(sub_end);
        }
        parse_body_items(i + 1, sub_end, fn);
      } else {
        ctx_.warn(ln.no, "unknown function key '" + key + "' ignored");
      }
      i = sub_end;
    }
  }

  void parse_body_items(size_t begin, size_t end, FunctionDef& fn) {
    std::vector<std::pair<std::string, int>> raws;
    for (size_t i = begin; i < end; ++i) {
      const Line& ln = lines_[i];
      if (ln.text.rfind("- ", 0) != 0) {
        ctx_.err(ln.no, "E020", "expected '- { ... }' statement item");
        continue;
      }
      raws.emplace_back(trim(std::string_view(ln.text).substr(2)), ln.no);
    }
    for (size_t k = 0; k < raws.size(); ++k) {
      bool is_last = (k + 1 == raws.size());
      auto st = parse_statement(raws[k].first, raws[k].second, ctx_, is_last);
      if (st) fn.body.push_back(std::move(*st));
    }
  }

  void parse_summaries(size_t begin, size_t end) {
    if (begin >= end) return;
    int level = lines_[begin].indent;
    for (size_t i = begin; i < end; ++i) {
      const Line& ln = lines_[i];
      if (ln.indent != level) {
        ctx_.err(ln.no, "E021", "unexpected nesting in summaries");
        continue;
      }
      size_t colon = ln.text.find(':');
      if (colon == std::string::npos) {
        ctx_.err(ln.no, "E021", "expected 'name: { ... }' in summaries");
        continue;
      }
      std::string name = trim(std::string_view(ln.text).substr(0, colon));
      std::string rest = trim(std::string_view(ln.text).substr(colon + 1));
      if (!is_ident(name)) {
        ctx_.err(ln.no, "E021", "invalid summary name '" + name + "'");
        continue;
      }
      auto map = parse_inline_map(rest, ln.no, ctx_);
      if (!map) continue;
      FunctionSummary summary;
      summary.name = name;
      bool bad = false;
      for (const auto& [key, value] : *map) {
        if (key == "reads" || key == "writes" || key == "calls") {
          auto list = parse_bracket_list(value, ln.no, ctx_);
          if (!list) {
            bad = true;
            break;
          }
          for (const auto& item : *list) {
            if (!is_ident(item)) {
              ctx_.err(ln.no, "E021", "invalid name '" + item + "' in summary");
              bad = true;
              break;
            }
          }
          if (bad) break;
          if (key == "reads") summary.reads = *list;
          else if (key == "writes") summary.writes = *list;
          else summary.calls = *list;
        } else if (key == "has_concurrency") {
          if (value == "true") summary.has_concurrency = true;
          else if (value == "false") summary.has_concurrency = false;
          else {
            ctx_.err(ln.no, "E021", "has_concurrency must be true or false");
            bad = true;
            break;
          }
        } else {
          ctx_.warn(ln.no, "unknown summary key '" + key + "' ignored");
        }
      }
      if (!bad) artifact_.summaries.push_back(std::move(summary));
    }
  }

  void parse_goals(size_t begin, size_t end) {
    size_t i = begin;
    while (i < end) {
      const Line& ln = lines_[i];
      if (ln.text.rfind("- ", 0) != 0) {
        ctx_.err(ln.no, "E022", "expected '- id: ...' goal item");
        i = children_end(i);
        continue;
      }
      size_t item_end = i + 1;
      while (item_end < end && lines_[item_end].indent > ln.indent) ++item_end;
      parse_goal_item(i, item_end);
      i = item_end;
    }
  }

  void parse_goal_item(size_t begin, size_t end) {
    BusinessGoal goal;
    const Line& first = lines_[begin];

    auto handle_field = [&](const std::string& key, const std::string& rest, int line,
                            size_t child_begin, size_t child_end) {
      if (key == "id") {
        if (!is_ident(rest)) ctx_.err(line, "E022", "goal id must be an identifier");
        else goal.id = rest;
      } else if (key == "desc") {
        if (!rest.empty() && rest.front() == '"') {
          auto lit = parse_literal(rest, line, ctx_);
          if (lit && !lit->is_top() && lit->type() == BaseType::String) {
            goal.description = std::get<std::string>(lit->v);
          }
        } else {
          goal.description = rest;
        }
      } else if (key == "completion" || key == "availability") {
        const char* keyword = key == "completion" ? "completed" : "available";
        for (size_t j = child_begin; j < child_end; ++j) {
          const Line& cl = lines_[j];
          if (cl.text.rfind("- ", 0) != 0) {
            ctx_.err(cl.no, "E022", "expected '- [name, " + std::string(keyword) + "]'");
            continue;
          }
          auto list = parse_bracket_list(trim(std::string_view(cl.text).substr(2)),
                                         cl.no, ctx_);
          if (!list) continue;
          if (list->size() != 2 || !is_ident((*list)[0]) || (*list)[1] != keyword) {
            ctx_.err(cl.no, "E022",
                     "malformed " + key + " entry; expected [name, " +
                         std::string(keyword) + "]");
            continue;
          }
          if (key == "completion") goal.completion.push_back((*list)[0]);
          else goal.availability.push_back((*list)[0]);
        }
      } else if (key == "variables") {
        for (size_t j = child_begin; j < child_end; ++j) {
          const Line& cl = lines_[j];
          size_t c = cl.text.find(':');
          if (c == std::string::npos) {
            ctx_.err(cl.no, "E022", "expected 'var: literal' under variables");
            continue;
          }
          std::string var = trim(std::string_view(cl.text).substr(0, c));
          std::string val = trim(std::string_view(cl.text).substr(c + 1));
          if (!is_ident(var)) {
            ctx_.err(cl.no, "E022", "invalid variable name '" + var + "'");
            continue;
          }
          auto lit = parse_literal(val, cl.no, ctx_);
          if (!lit) continue;
          goal.variables.emplace_back(var, std::move(*lit));
        }
      } else {
        ctx_.warn(line, "unknown goal key '" + key + "' ignored");
      }
    };

    // first field sits on the dash line
    {
      std::string text = trim(std::string_view(first.text).substr(2));
      size_t colon = text.find(':');
      if (colon == std::string::npos) {
        ctx_.err(first.no, "E022", "goal item must start with a field");
        return;
      }
      std::string key = trim(std::string_view(text).substr(0, colon));
      std::string rest = trim(std::string_view(text).substr(colon + 1));
      handle_field(key, rest, first.no, begin + 1, begin + 1);  // no children
    }

    size_t i = begin + 1;
    while (i < end) {
      const Line& ln = lines_[i];
      size_t sub_end = i + 1;
      while (sub_end < end && lines_[sub_end].indent > ln.indent) ++sub_end;
      size_t colon = ln.text.find(':');
      if (colon == std::string::npos) {
        ctx_.err(ln.no, "E022", "expected 'field:' in goal item");
        i = sub_end;
        continue;
      }
      std::string key = trim(std::string_view(ln.text).substr(0, colon));
      std::string rest = trim(std::string_view(ln.text).substr(colon + 1));
      handle_field(key, rest, ln.no, i + 1, sub_end);
      i = sub_end;
    }
    artifact_.goals.push_back(std::move(goal));
  }

  // The threads: form designates all listed threads as concurrently live. We
  // realize that with a generated entry that spawns each thread in listing
  // order and returns; the generated function is marked synthetic so that the
  // serializer can reproduce the threads: form and diagnostics can keep
  // generated sids out of user-facing traces.
  void desugar_threads() {
    if (!threads_present_) {
      artifact_.entry = explicit_entry_;
      return;
    }
    artifact_.threads_form = true;
    if (!explicit_entry_.empty()) {
      ctx_.err(1, "E017", "'entry' conflicts with the threads: form");
      return;
    }
    if (thread_names_.empty()) return;  // F stays empty; the checker rejects it

    std::set<std::string> taken_names;
    std::set<std::string> taken_sids;
    for (const auto& fn : artifact_.functions) {
      taken_names.insert(fn.name);
      for (const auto& st : fn.body) taken_sids.insert(st.sid);
    }
    for (const auto& s : artifact_.summaries) taken_names.insert(s.name);

    std::string entry_name;
    for (int attempt = 0;; ++attempt) {
      std::string candidate = attempt == 0 ? "main"
                              : attempt == 1
                                  ? "main_entry"
                                  : "main_entry" + std::to_string(attempt);
      if (taken_names.count(candidate)) continue;
      bool sid_clash = false;
      for (size_t k = 1; k <= thread_names_.size(); ++k) {
        if (taken_sids.count(candidate + "_s" + std::to_string(k))) {
          sid_clash = true;
          break;
        }
      }
      if (!sid_clash) {
        entry_name = candidate;
        break;
      }
    }

    FunctionDef entry;
    entry.name = entry_name;
    entry.synthetic = true;
    for (size_t k = 0; k < thread_names_.size(); ++k) {
      Statement st;
      st.sid = entry_name + "_s" + std::to_string(k + 1);
      st.op.kind = OpKind::Spawn;
      st.op.target = thread_names_[k];
      st.transfer = (k + 1 == thread_names_.size())
                        ? Transfer::ret()
                        : Transfer::to(entry_name + "_s" + std::to_string(k + 2));
      entry.body.push_back(std::move(st));
    }
    artifact_.entry = entry_name;
    artifact_.functions.push_back(std::move(entry));
  }

  std::vector<Line> lines_;
  Ctx& ctx_;
  CirArtifact artifact_;
  bool threads_present_ = false;
  std::string explicit_entry_;
  std::vector<std::string> thread_names_;
};

}  // namespace

const Statement* FunctionDef::find_statement(const std::string& sid) const {
  for (const auto& st : body) {
    if (st.sid == sid) return &st;
  }
  return nullptr;
}

const ResourceDecl* CirArtifact::find_resource(const std::string& name) const {
  for (const auto& r : resources) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const FunctionDef* CirArtifact::find_function(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const FunctionSummary* CirArtifact::find_summary(const std::string& name) const {
  for (const auto& s : summaries) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const std::vector<std::string>* CirArtifact::protection_of(
    const std::string& var) const {
  for (const auto& [v, locks] : protection) {
    if (v == var) return &locks;
  }
  return nullptr;
}

bool CirArtifact::sid_exists(const std::string& sid) const {
  for (const auto& f : functions) {
    if (f.find_statement(sid) != nullptr) return true;
  }
  return false;
}

ParseResult parse_cir(std::string_view text) {
  Ctx ctx;
  auto lines = logical_lines(text, ctx);
  DocParser parser(std::move(lines), ctx);
  auto artifact = parser.run();
  ParseResult result;
  result.errors = std::move(ctx.errors);
  result.warnings = std::move(ctx.warnings);
  if (result.errors.empty()) result.artifact = std::move(artifact);
  return result;
}

}  // namespace cvnverify
