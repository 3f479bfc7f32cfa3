#include "cyclic/expression.hpp"

#include "cyclic/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace cyclic {

namespace {

enum class Op { Push, Load, Add, Sub, Mul, Neg, Pow, Sin, Cos };

struct Instr {
  Op op;
  double value = 0.0;
  std::size_t index = 0;
  int exponent = 0;
};

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars) {}

  std::vector<Instr> run() {
    parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return std::move(code_);
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError("expression '" + text_ + "': " + why + " at offset " +
                          std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void parse_expr() {
    parse_term();
    for (;;) {
      if (accept('+')) {
        parse_term();
        code_.push_back({Op::Add});
      } else if (accept('-')) {
        parse_term();
        code_.push_back({Op::Sub});
      } else {
        return;
      }
    }
  }

  void parse_term() {
    parse_unary();
    while (accept('*')) {
      parse_unary();
      code_.push_back({Op::Mul});
    }
  }

  void parse_unary() {
    if (accept('-')) {
      parse_unary();
      code_.push_back({Op::Neg});
      return;
    }
    parse_power();
  }

  void parse_power() {
    parse_primary();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a non-negative integer literal");
      code_.push_back({Op::Pow, 0.0, 0, std::stoi(text_.substr(start, pos_ - start))});
    }
  }

  void parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      parse_expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      code_.push_back({Op::Push, v});
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name = text_.substr(start, pos_ - start);
      if (name == "sin" || name == "cos") {
        expect('(');
        parse_expr();
        expect(')');
        code_.push_back({name == "sin" ? Op::Sin : Op::Cos});
        return;
      }
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) {
          code_.push_back({Op::Load, 0.0, i});
          return;
        }
      }
      if (name == "pi") {
        code_.push_back({Op::Push, std::numbers::pi});
        return;
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
  std::vector<Instr> code_;
};

}  // namespace

struct Expression::Program {
  std::vector<Instr> code;
  std::vector<std::string> variables;
  std::size_t stack_depth = 0;
};

Expression Expression::parse(const std::string& text, std::vector<std::string> variables) {
  auto program = std::make_shared<Program>();
  program->code = Parser(text, variables).run();
  program->variables = std::move(variables);

  std::size_t depth = 0;
  for (const Instr& in : program->code) {
    switch (in.op) {
      case Op::Push:
      case Op::Load:
        ++depth;
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
        --depth;
        break;
      default:
        break;
    }
    program->stack_depth = std::max(program->stack_depth, depth);
  }

  Expression e;
  e.program_ = std::move(program);
  e.text_ = text;
  return e;
}

Expression Expression::constant(double value) {
  auto program = std::make_shared<Program>();
  program->code.push_back({Op::Push, value});
  program->stack_depth = 1;
  Expression e;
  e.program_ = std::move(program);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  e.text_ = buf;
  return e;
}

double Expression::evaluate(std::span<const double> values) const {
  constexpr std::size_t kInline = 32;
  double inline_stack[kInline] = {};
  std::vector<double> heap_stack;
  double* stack = inline_stack;
  if (program_->stack_depth > kInline) {
    heap_stack.resize(program_->stack_depth);
    stack = heap_stack.data();
  }

  std::size_t top = 0;
  for (const Instr& in : program_->code) {
    switch (in.op) {
      case Op::Push:
        stack[top++] = in.value;
        break;
      case Op::Load:
        stack[top++] = values[in.index];
        break;
      case Op::Add:
        --top;
        stack[top - 1] += stack[top];
        break;
      case Op::Sub:
        --top;
        stack[top - 1] -= stack[top];
        break;
      case Op::Mul:
        --top;
        stack[top - 1] *= stack[top];
        break;
      case Op::Neg:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::Pow: {
        double base = stack[top - 1];
        double acc = 1.0;
        for (int k = 0; k < in.exponent; ++k) acc *= base;
        stack[top - 1] = acc;
        break;
      }
      case Op::Sin:
        stack[top - 1] = std::sin(stack[top - 1]);
        break;
      case Op::Cos:
        stack[top - 1] = std::cos(stack[top - 1]);
        break;
    }
  }
  return stack[0];
}

bool Expression::depends_on(std::size_t variable_index) const {
  for (const Instr& in : program_->code)
    if (in.op == Op::Load && in.index == variable_index) return true;
  return false;
}

bool Expression::is_constant() const {
  for (const Instr& in : program_->code)
    if (in.op == Op::Load) return false;
  return true;
}

}  // namespace cyclic
