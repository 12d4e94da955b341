#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cxr/numkit/tensor.hpp"

namespace cxr::numkit::detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

// Creates the output node of an op. Parents and the backward closure are only
// kept when grad mode is on and some parent needs a gradient.
std::shared_ptr<Node> make_result(Shape shape, std::vector<double> data,
                                  std::vector<std::shared_ptr<Node>> parents,
                                  std::function<void(Node&)> backward);

}  // namespace cxr::numkit::detail
