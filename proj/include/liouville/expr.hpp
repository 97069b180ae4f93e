#pragma once

#include <memory>
#include <string>

#include "liouville/actionangle.hpp"

namespace liouville {

// Tiny arithmetic expression grammar over the action variables I1..Im:
// identifiers, + - * / ^, parentheses, real literals. Differentiation is
// exact and symbolic, so chart shifts get analytic gradients.
class Expression {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  static Expression parse(const std::string& text, int m);

  double eval(const VectorXd& I) const;
  Expression derivative(int var) const;
  std::string str() const;
  int vars() const { return m_; }

 private:
  Expression(NodePtr root, int m) : root_(std::move(root)), m_(m) {}
  NodePtr root_;
  int m_ = 0;
};

// Parse and package value + gradient as a smooth function of the actions.
ActionFunction compile_action_function(const std::string& text, int m);

}  // namespace liouville
