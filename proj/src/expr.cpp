#include "dynclust/expr.hpp"

#include <cctype>
#include <cmath>

#include "dynclust/errors.hpp"

namespace dynclust {

struct BudgetExpr::Node {
  enum class Op { kNum, kK, kN, kAdd, kSub, kMul, kDiv, kPow, kNeg, kLog2, kLn, kSqrt } op;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;

  double eval(double k, double n) const {
    switch (op) {
      case Op::kNum: return value;
      case Op::kK: return k;
      case Op::kN: return n;
      case Op::kAdd: return a->eval(k, n) + b->eval(k, n);
      case Op::kSub: return a->eval(k, n) - b->eval(k, n);
      case Op::kMul: return a->eval(k, n) * b->eval(k, n);
      case Op::kDiv: return a->eval(k, n) / b->eval(k, n);
      case Op::kPow: return std::pow(a->eval(k, n), b->eval(k, n));
      case Op::kNeg: return -a->eval(k, n);
      case Op::kLog2: return std::log2(a->eval(k, n));
      case Op::kLn: return std::log(a->eval(k, n));
      case Op::kSqrt: return std::sqrt(a->eval(k, n));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const BudgetExpr::Node>;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  using Op = BudgetExpr::Node::Op;

  static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<BudgetExpr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    n->value = v;
    return n;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::kMalformedInput, "budget expression '" + s_ + "': " + why);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr e = product();
    for (;;) {
      if (eat('+')) e = make(Op::kAdd, e, product());
      else if (eat('-')) e = make(Op::kSub, e, product());
      else return e;
    }
  }

  NodePtr product() {
    NodePtr e = unary();
    for (;;) {
      if (eat('*')) e = make(Op::kMul, e, unary());
      else if (eat('/')) e = make(Op::kDiv, e, unary());
      else return e;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Op::kNeg, unary());
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Op::kPow, base, unary());  // right-associative
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      NodePtr e = sum();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return make(Op::kNum, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string word = s_.substr(start, pos_ - start);
      if (word == "k") return make(Op::kK);
      if (word == "n") return make(Op::kN);
      Op fn;
      if (word == "log" || word == "log2") fn = Op::kLog2;
      else if (word == "ln") fn = Op::kLn;
      else if (word == "sqrt") fn = Op::kSqrt;
      else fail("unknown name '" + word + "'");
      if (!eat('(')) fail("expected '(' after " + word);
      NodePtr arg = sum();
      if (!eat(')')) fail("missing ')'");
      return make(fn, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

BudgetExpr BudgetExpr::parse(const std::string& text) {
  BudgetExpr e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double BudgetExpr::operator()(double k, double n) const { return root_->eval(k, n); }

}  // namespace dynclust
