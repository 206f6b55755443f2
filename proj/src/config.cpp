#include "config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace driftctl {

namespace {

// Grammar
//   file    := block*
//   block   := NAME '{' (NAME '=' value)* '}'
//   value   := NUMBER | STRING | NAME | '[' (value (',' value)*)? ']'
//            | NAME '(' (NAME '=' value (',' NAME '=' value)*)? ')'
// '#' starts a comment that runs to the end of the line.

struct Token {
  enum Kind { kName, kNumber, kString, kPunct, kEnd } kind;
  std::string text;
  double number = 0.0;
  int line = 0;
};

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  fail(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + msg);
}

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      Token t{Token::kName, s.substr(i, j - i), 0.0, line};
      if (t.text == "inf") t = {Token::kNumber, t.text, HUGE_VAL, line};
      out.push_back(t);
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
               c == '+' || c == '.') {
      if ((c == '-' || c == '+') && s.compare(i + 1, 3, "inf") == 0) {
        out.push_back({Token::kNumber, s.substr(i, 4),
                       c == '-' ? -HUGE_VAL : HUGE_VAL, line});
        i += 4;
        continue;
      }
      const char* begin = s.c_str() + i;
      char* end = nullptr;
      const double x = std::strtod(begin, &end);
      if (end == begin) parse_fail(line, "bad number");
      const std::size_t len = std::size_t(end - begin);
      out.push_back({Token::kNumber, s.substr(i, len), x, line});
      i += len;
    } else if (c == '"') {
      const std::size_t j = s.find('"', i + 1);
      if (j == std::string::npos || s.find('\n', i) < j)
        parse_fail(line, "unterminated string");
      out.push_back({Token::kString, s.substr(i + 1, j - i - 1), 0.0, line});
      i = j + 1;
    } else if (std::string("{}[](),=").find(c) != std::string::npos) {
      out.push_back({Token::kPunct, std::string(1, c), 0.0, line});
      ++i;
    } else {
      parse_fail(line, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::kEnd, "", 0.0, line});
  return out;
}

struct Value {
  enum Kind { kNumber, kString, kName, kList, kCall } kind = kNumber;
  double number = 0.0;
  std::string text;
  std::vector<Value> items;
  std::vector<std::pair<std::string, Value>> args;
  int line = 0;
};

using Block = std::vector<std::pair<std::string, Value>>;

class Parser {
 public:
  explicit Parser(std::vector<Token> t) : toks_(std::move(t)) {}

  std::vector<std::pair<std::string, Block>> file() {
    std::vector<std::pair<std::string, Block>> blocks;
    while (peek().kind != Token::kEnd) {
      const Token name = expect_name();
      expect("{");
      Block blk;
      while (!is("}")) {
        if (peek().kind == Token::kEnd)
          parse_fail(name.line, "block '" + name.text + "' is not closed");
        const Token key = expect_name();
        expect("=");
        blk.emplace_back(key.text, value());
        blk.back().second.line = key.line;
      }
      expect("}");
      blocks.emplace_back(name.text, std::move(blk));
    }
    return blocks;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek() const { return toks_[pos_]; }
  bool is(const char* p) const {
    return peek().kind == Token::kPunct && peek().text == p;
  }
  void expect(const char* p) {
    if (!is(p))
      parse_fail(peek().line, std::string("expected '") + p + "' but found '" +
                                  peek().text + "'");
    ++pos_;
  }
  Token expect_name() {
    if (peek().kind != Token::kName)
      parse_fail(peek().line, "expected a name but found '" + peek().text + "'");
    return toks_[pos_++];
  }

  Value value() {
    const Token& t = peek();
    Value v;
    v.line = t.line;
    if (t.kind == Token::kNumber) {
      v.kind = Value::kNumber;
      v.number = t.number;
      ++pos_;
    } else if (t.kind == Token::kString) {
      v.kind = Value::kString;
      v.text = t.text;
      ++pos_;
    } else if (is("[")) {
      ++pos_;
      v.kind = Value::kList;
      while (!is("]")) {
        v.items.push_back(value());
        if (!is("]")) expect(",");
      }
      ++pos_;
    } else if (t.kind == Token::kName) {
      v.kind = Value::kName;
      v.text = t.text;
      ++pos_;
      if (is("(")) {
        ++pos_;
        v.kind = Value::kCall;
        while (!is(")")) {
          const Token key = expect_name();
          expect("=");
          v.args.emplace_back(key.text, value());
          if (!is(")")) expect(",");
        }
        ++pos_;
      }
    } else {
      parse_fail(t.line, "expected a value but found '" + t.text + "'");
    }
    return v;
  }
};

double number(const Value& v, const std::string& key) {
  if (v.kind != Value::kNumber)
    parse_fail(v.line, "'" + key + "' must be a number");
  return v.number;
}

std::size_t count(const Value& v, const std::string& key) {
  const double x = number(v, key);
  if (!(x >= 0.0) || x != std::floor(x) || x > 9.0e15)
    parse_fail(v.line, "'" + key + "' must be a nonnegative integer");
  return std::size_t(x);
}

std::string text(const Value& v, const std::string& key) {
  if (v.kind != Value::kString && v.kind != Value::kName)
    parse_fail(v.line, "'" + key + "' must be a string");
  return v.text;
}

std::vector<double> numbers(const Value& v, const std::string& key) {
  if (v.kind != Value::kList) parse_fail(v.line, "'" + key + "' must be a list");
  std::vector<double> out;
  for (const Value& x : v.items) out.push_back(number(x, key));
  return out;
}

ActionSet parse_domain(const Value& v) {
  if (v.kind != Value::kList)
    parse_fail(v.line, "'domain' must be a list of [lo, hi] pairs and points");
  std::vector<Interval> pieces;
  for (const Value& item : v.items) {
    if (item.kind == Value::kNumber) {
      pieces.push_back({item.number, item.number});
    } else if (item.kind == Value::kList && item.items.size() == 2) {
      pieces.push_back({number(item.items[0], "domain"),
                        number(item.items[1], "domain")});
    } else {
      parse_fail(item.line, "domain entries are numbers or [lo, hi] pairs");
    }
  }
  return ActionSet(std::move(pieces));
}

PieceCost parse_piece(const Value& v) {
  if (v.kind != Value::kCall && v.kind != Value::kName)
    parse_fail(v.line, "cost entries look like kind(key = value, ...)");
  std::map<std::string, const Value*> args;
  for (const auto& [k, x] : v.args) {
    if (!args.emplace(k, &x).second)
      parse_fail(x.line, "duplicate argument '" + k + "'");
  }
  auto take = [&](const std::set<std::string>& allowed) {
    for (const auto& [k, x] : args)
      if (!allowed.count(k))
        parse_fail(x->line, "unknown argument '" + k + "' for " + v.text);
  };
  auto num = [&](const char* k, double dflt) {
    auto it = args.find(k);
    return it == args.end() ? dflt : number(*it->second, k);
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (v.text == "linear") {
    take({"slope", "intercept"});
    return cost::Linear{num("slope", 0.0), num("intercept", 0.0)};
  }
  if (v.text == "power") {
    take({"coeff", "exponent", "shift", "offset"});
    return cost::Power{num("coeff", 1.0), num("exponent", 2.0),
                       num("shift", nan), num("offset", 0.0)};
  }
  if (v.text == "exponential") {
    take({"alpha", "shift", "scale", "offset"});
    return cost::Exponential{num("alpha", 1.0), num("shift", nan),
                             num("scale", 1.0), num("offset", nan)};
  }
  if (v.text == "table") {
    take({"x", "y"});
    if (!args.count("x") || !args.count("y"))
      parse_fail(v.line, "table needs both x and y");
    return cost::Table{numbers(*args["x"], "x"), numbers(*args["y"], "y")};
  }
  parse_fail(v.line, "unknown cost kind '" + v.text + "'");
}

template <class Handler>
void for_each_key(const Block& blk, const std::string& block_name,
                  const std::set<std::string>& allowed, Handler&& h) {
  std::set<std::string> seen;
  for (const auto& [key, val] : blk) {
    if (!allowed.count(key))
      parse_fail(val.line, "unknown key '" + key + "' in block '" + block_name + "'");
    if (!seen.insert(key).second)
      parse_fail(val.line, "duplicate key '" + key + "'");
    h(key, val);
  }
}

}  // namespace

RunConfig parse_config(const std::string& text_in) {
  Parser parser(tokenize(text_in));
  RunConfig cfg;
  std::set<std::string> seen_blocks;
  for (const auto& [name, blk] : parser.file()) {
    const int line = blk.empty() ? 0 : blk.front().second.line;
    if (!seen_blocks.insert(name).second)
      parse_fail(line, "duplicate block '" + name + "'");
    if (name == "model") {
      for_each_key(blk, name, {"domain", "cost"}, [&](auto& k, auto& v) {
        if (k == "domain") {
          cfg.actions = parse_domain(v);
        } else {
          if (v.kind != Value::kList) parse_fail(v.line, "'cost' must be a list");
          CostSpec spec;
          for (const Value& item : v.items) spec.pieces.push_back(parse_piece(item));
          cfg.cost = std::move(spec);
        }
      });
      if (!cfg.actions || !cfg.cost)
        parse_fail(line, "model block needs both 'domain' and 'cost'");
    } else if (name == "wireless") {
      WirelessSpec w;
      for_each_key(blk, name, {"lambda", "d", "alpha", "sigma", "theta_min"},
                   [&](auto& k, auto& v) {
                     const double x = number(v, k);
                     if (k == "lambda") w.lambda = x;
                     else if (k == "d") w.d = x;
                     else if (k == "alpha") w.alpha = x;
                     else if (k == "sigma") w.sigma = x;
                     else w.theta_min = x;
                   });
      cfg.wireless = w;
    } else if (name == "params") {
      for_each_key(blk, name, {"sigma2", "b", "p", "beta_hat", "n_z"},
                   [&](auto& k, auto& v) {
                     if (k == "n_z") {
                       cfg.n_z = count(v, k);
                       return;
                     }
                     const double x = number(v, k);
                     if (k == "sigma2") cfg.sigma2 = x;
                     else if (k == "b") cfg.b = x;
                     else if (k == "p") cfg.p = x;
                     else cfg.beta_hat = x;
                   });
      if (cfg.p && cfg.beta_hat)
        parse_fail(line, "give either 'p' or 'beta_hat', not both");
    } else if (name == "sim") {
      cfg.has_sim = true;
      for_each_key(blk, name,
                   {"dt", "T", "n_reps", "seed", "burn_in", "z0", "scheme",
                    "tol_mc", "hist_bins", "threads", "dump_stride"},
                   [&](auto& k, auto& v) {
                     SimConfig& s = cfg.sim;
                     if (k == "dt") s.dt = number(v, k);
                     else if (k == "T") s.T = number(v, k);
                     else if (k == "n_reps") s.n_reps = count(v, k);
                     else if (k == "seed") s.seed = count(v, k);
                     else if (k == "burn_in") s.burn_in = number(v, k);
                     else if (k == "z0") s.z0 = number(v, k);
                     else if (k == "tol_mc") s.tol_mc = number(v, k);
                     else if (k == "hist_bins") s.hist_bins = count(v, k);
                     else if (k == "threads") s.threads = count(v, k);
                     else if (k == "dump_stride") cfg.dump_stride = count(v, k);
                     else {
                       const std::string sch = text(v, k);
                       if (sch == "bridge") s.scheme = ReflectionScheme::kBridge;
                       else if (sch == "projection") s.scheme = ReflectionScheme::kProjection;
                       else parse_fail(v.line, "scheme must be bridge or projection");
                     }
                   });
    } else if (name == "output") {
      for_each_key(blk, name, {"dir"},
                   [&](auto& k, auto& v) { cfg.out_dir = text(v, k); });
    } else {
      parse_fail(line, "unknown block '" + name + "'");
    }
  }
  if (cfg.wireless && cfg.actions)
    fail(ErrorCode::kParseError, "use either a model block or a wireless block");
  if (cfg.wireless && (cfg.sigma2 || cfg.b))
    fail(ErrorCode::kParseError,
         "sigma2 and b come from the wireless block; drop them from params");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CostModel RunConfig::model() const {
  if (wireless)
    return wireless_setup(wireless->lambda, wireless->d, wireless->alpha,
                          wireless->sigma, wireless->theta_min)
        .model;
  if (!actions || !cost)
    fail(ErrorCode::kParseError, "config has no model or wireless block");
  return CostModel::validate(*actions, *cost);
}

SystemParams RunConfig::system() const {
  if (wireless)
    return wireless_setup(wireless->lambda, wireless->d, wireless->alpha,
                          wireless->sigma, wireless->theta_min)
        .system;
  if (!sigma2) fail(ErrorCode::kParseError, "params block is missing 'sigma2'");
  if (!b) fail(ErrorCode::kParseError, "params block is missing 'b'");
  return {*sigma2, *b};
}

ProblemParams RunConfig::problem() const {
  const SystemParams s = system();
  if (!p) fail(ErrorCode::kParseError, "params block is missing 'p'");
  ProblemParams out{s.sigma2, s.b, *p};
  out.check();
  return out;
}

BellmanOptions RunConfig::bellman_options() const {
  BellmanOptions o;
  if (n_z) o.n_z = *n_z;
  return o;
}

}  // namespace driftctl
