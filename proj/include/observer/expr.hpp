#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "observer/types.hpp"

namespace observer {

struct ParseError : std::runtime_error {
  size_t offset;
  ParseError(const std::string& what, size_t off)
      : std::runtime_error(what + " (offset " + std::to_string(off) + ")"),
        offset(off) {}
};

/// Parsed coefficient expression in the variables x1, x2, t.
/// Grammar: numbers, x1..xd, t, + - * / unary -, parentheses,
/// functions sin cos abs exp, and ^ with a constant exponent.
class Expr {
 public:
  Expr() = default;

  static Expr parse(const std::string& src);

  bool valid() const { return !prog_.empty(); }
  bool is_constant() const;
  double constant_value() const;  // requires is_constant()
  bool uses_time() const;
  bool uses_x2() const;

  double operator()(double x1, double x2, double t) const;

  /// Evaluate at every row of `pts` (n x dim) for a fixed time; writes n values.
  void eval_batch(const Matrix& pts, double t, double* out) const;

  const std::string& source() const { return src_; }

 private:
  enum class Op : uint8_t {
    Const, X1, X2, T, Neg, Sin, Cos, Abs, Exp, Add, Sub, Mul, Div, PowConst
  };
  struct Instr {
    Op op;
    double value = 0.0;  // Const / PowConst payload
  };
  std::vector<Instr> prog_;  // postfix program
  int max_stack_ = 0;
  std::string src_;

  friend class ExprParser;
};

}  // namespace observer
