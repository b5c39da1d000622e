#include "observer/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace observer {

class ExprParser {
 public:
  explicit ExprParser(const std::string& src) : src_(src) {}

  Expr run() {
    Expr e;
    e.src_ = src_;
    parse_expr(e.prog_);
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("trailing input", pos_);
    if (e.prog_.empty()) throw ParseError("empty expression", 0);
    fold(e.prog_);
    e.max_stack_ = stack_need(e.prog_);
    return e;
  }

 private:
  using Prog = std::vector<Expr::Instr>;
  const std::string& src_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) { ++pos_; return true; }
    return false;
  }

  void parse_expr(Prog& p) {
    parse_term(p);
    for (;;) {
      skip_ws();
      if (eat('+')) { parse_term(p); p.push_back({Expr::Op::Add}); }
      else if (eat('-')) { parse_term(p); p.push_back({Expr::Op::Sub}); }
      else break;
    }
  }

  void parse_term(Prog& p) {
    parse_factor(p);
    for (;;) {
      skip_ws();
      if (eat('*')) { parse_factor(p); p.push_back({Expr::Op::Mul}); }
      else if (eat('/')) { parse_factor(p); p.push_back({Expr::Op::Div}); }
      else break;
    }
  }

  void parse_factor(Prog& p) {
    skip_ws();
    if (eat('-')) {
      parse_factor(p);
      p.push_back({Expr::Op::Neg});
      return;
    }
    parse_power(p);
  }

  void parse_power(Prog& p) {
    parse_atom(p);
    skip_ws();
    if (eat('^')) {
      const size_t at = pos_;
      Prog rhs;
      parse_factor(rhs);
      fold(rhs);
      if (rhs.size() != 1 || rhs[0].op != Expr::Op::Const)
        throw ParseError("exponent must be a constant", at);
      p.push_back({Expr::Op::PowConst, rhs[0].value});
    }
  }

  void parse_atom(Prog& p) {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      parse_expr(p);
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("expected a number", pos_);
      pos_ += static_cast<size_t>(end - begin);
      p.push_back({Expr::Op::Const, v});
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      const std::string id = src_.substr(start, pos_ - start);
      if (id == "x1") { p.push_back({Expr::Op::X1}); return; }
      if (id == "x2") { p.push_back({Expr::Op::X2}); return; }
      if (id == "t")  { p.push_back({Expr::Op::T});  return; }
      if (id == "pi") { p.push_back({Expr::Op::Const, std::numbers::pi}); return; }
      Expr::Op fn;
      if (id == "sin") fn = Expr::Op::Sin;
      else if (id == "cos") fn = Expr::Op::Cos;
      else if (id == "abs") fn = Expr::Op::Abs;
      else if (id == "exp") fn = Expr::Op::Exp;
      else throw ParseError("unknown identifier '" + id + "'", start);
      if (!eat('(')) throw ParseError("expected '(' after function name", pos_);
      parse_expr(p);
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      p.push_back({fn});
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  // Constant folding over the postfix program.
  static void fold(Prog& p) {
    Prog out;
    std::vector<size_t> starts;  // start index in `out` of each stack entry
    for (const auto& ins : p) {
      switch (ins.op) {
        case Expr::Op::Const:
        case Expr::Op::X1:
        case Expr::Op::X2:
        case Expr::Op::T:
          starts.push_back(out.size());
          out.push_back(ins);
          break;
        case Expr::Op::Neg: case Expr::Op::Sin: case Expr::Op::Cos:
        case Expr::Op::Abs: case Expr::Op::Exp: case Expr::Op::PowConst: {
          const size_t s = starts.back();
          if (out.size() == s + 1 && out[s].op == Expr::Op::Const) {
            out[s].value = apply1(ins, out[s].value);
          } else {
            out.push_back(ins);
          }
          break;
        }
        default: {  // binary
          const size_t s2 = starts.back(); starts.pop_back();
          const size_t s1 = starts.back();
          if (out.size() == s2 + 1 && out[s2].op == Expr::Op::Const &&
              s2 == s1 + 1 && out[s1].op == Expr::Op::Const) {
            out[s1].value = apply2(ins, out[s1].value, out[s2].value);
            out.pop_back();
          } else {
            out.push_back(ins);
          }
          break;
        }
      }
    }
    p = std::move(out);
  }

  static double apply1(const Expr::Instr& ins, double a) {
    switch (ins.op) {
      case Expr::Op::Neg: return -a;
      case Expr::Op::Sin: return std::sin(a);
      case Expr::Op::Cos: return std::cos(a);
      case Expr::Op::Abs: return std::abs(a);
      case Expr::Op::Exp: return std::exp(a);
      case Expr::Op::PowConst: return std::pow(a, ins.value);
      default: return a;
    }
  }

  static double apply2(const Expr::Instr& ins, double a, double b) {
    switch (ins.op) {
      case Expr::Op::Add: return a + b;
      case Expr::Op::Sub: return a - b;
      case Expr::Op::Mul: return a * b;
      case Expr::Op::Div: return a / b;
      default: return a;
    }
  }

  static int stack_need(const Prog& p) {
    int depth = 0, need = 0;
    for (const auto& ins : p) {
      switch (ins.op) {
        case Expr::Op::Const: case Expr::Op::X1: case Expr::Op::X2: case Expr::Op::T:
          ++depth; need = std::max(need, depth); break;
        case Expr::Op::Add: case Expr::Op::Sub: case Expr::Op::Mul: case Expr::Op::Div:
          --depth; break;
        default: break;
      }
    }
    return need;
  }
};

Expr Expr::parse(const std::string& src) { return ExprParser(src).run(); }

bool Expr::is_constant() const {
  return prog_.size() == 1 && prog_[0].op == Op::Const;
}

double Expr::constant_value() const { return prog_[0].value; }

bool Expr::uses_time() const {
  for (const auto& ins : prog_)
    if (ins.op == Op::T) return true;
  return false;
}

bool Expr::uses_x2() const {
  for (const auto& ins : prog_)
    if (ins.op == Op::X2) return true;
  return false;
}

double Expr::operator()(double x1, double x2, double t) const {
  double stack[32];
  int top = -1;
  for (const auto& ins : prog_) {
    switch (ins.op) {
      case Op::Const: stack[++top] = ins.value; break;
      case Op::X1: stack[++top] = x1; break;
      case Op::X2: stack[++top] = x2; break;
      case Op::T: stack[++top] = t; break;
      case Op::Neg: stack[top] = -stack[top]; break;
      case Op::Sin: stack[top] = std::sin(stack[top]); break;
      case Op::Cos: stack[top] = std::cos(stack[top]); break;
      case Op::Abs: stack[top] = std::abs(stack[top]); break;
      case Op::Exp: stack[top] = std::exp(stack[top]); break;
      case Op::PowConst: stack[top] = std::pow(stack[top], ins.value); break;
      case Op::Add: stack[top - 1] += stack[top]; --top; break;
      case Op::Sub: stack[top - 1] -= stack[top]; --top; break;
      case Op::Mul: stack[top - 1] *= stack[top]; --top; break;
      case Op::Div: stack[top - 1] /= stack[top]; --top; break;
    }
  }
  return stack[0];
}

void Expr::eval_batch(const Matrix& pts, double t, double* out) const {
  const Eigen::Index n = pts.rows();
  const bool two_d = pts.cols() == 2;
  // Fast path: affine-free single-op programs show up constantly (constants).
  if (is_constant()) {
    const double v = prog_[0].value;
    for (Eigen::Index i = 0; i < n; ++i) out[i] = v;
    return;
  }
  std::vector<Vector> stack(static_cast<size_t>(max_stack_), Vector(n));
  int top = -1;
  for (const auto& ins : prog_) {
    switch (ins.op) {
      case Op::Const: stack[++top].setConstant(ins.value); break;
      case Op::X1: stack[++top] = pts.col(0); break;
      case Op::X2:
        if (two_d) stack[++top] = pts.col(1); else stack[++top].setZero();
        break;
      case Op::T: stack[++top].setConstant(t); break;
      case Op::Neg: stack[top] = -stack[top]; break;
      case Op::Sin: stack[top] = stack[top].array().sin(); break;
      case Op::Cos: stack[top] = stack[top].array().cos(); break;
      case Op::Abs: stack[top] = stack[top].array().abs(); break;
      case Op::Exp: stack[top] = stack[top].array().exp(); break;
      case Op::PowConst: stack[top] = stack[top].array().pow(ins.value); break;
      case Op::Add: stack[top - 1] += stack[top]; --top; break;
      case Op::Sub: stack[top - 1] -= stack[top]; --top; break;
      case Op::Mul: stack[top - 1].array() *= stack[top].array(); --top; break;
      case Op::Div: stack[top - 1].array() /= stack[top].array(); --top; break;
    }
  }
  Eigen::Map<Vector>(out, n) = stack[0];
}

}  // namespace observer
