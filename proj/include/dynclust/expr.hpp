#pragma once

#include <memory>
#include <string>
#include <vector>

namespace dynclust {

// Arithmetic over the variables k and n: + - * / ^, unary minus, parentheses
// and the functions log (base 2), log2, ln, sqrt.
class BudgetExpr {
 public:
  static BudgetExpr parse(const std::string& text);
  double operator()(double k, double n) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace dynclust
