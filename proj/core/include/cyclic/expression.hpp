#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cyclic {

/// Compiled scalar expression over a fixed list of named variables.
///
/// Grammar (whitespace insensitive):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary ('*' unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' integer)?
///     primary := number | 'pi' | variable | ('sin' | 'cos') '(' expr ')' | '(' expr ')'
///
/// Division is deliberately absent so that entries stay smooth everywhere.
class Expression {
 public:
  /// Parses `text`. Identifiers must appear in `variables`; throws ValidationError otherwise.
  static Expression parse(const std::string& text, std::vector<std::string> variables);
  static Expression constant(double value);

  /// `values` is indexed like the variable list given to parse().
  double evaluate(std::span<const double> values) const;

  bool depends_on(std::size_t variable_index) const;
  bool is_constant() const;
  const std::string& text() const noexcept { return text_; }

 private:
  struct Program;
  std::shared_ptr<const Program> program_;
  std::string text_;
};

}  // namespace cyclic
