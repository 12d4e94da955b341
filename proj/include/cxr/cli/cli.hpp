#pragma once

// Command surface of the `cxr` tool. Exit codes: 0 ok, 1 usage, 2 data,
// 3 numeric. Failures print one line to the error stream:
//   cxr: error kind=<usage|data|numeric> message="<text>"

#include <ostream>
#include <string>
#include <vector>

namespace cxr::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// One row of the ablation grid: the training flags that select it.
struct Variant {
  std::string name;
  std::vector<std::string> flags;
  std::size_t num_views;
  bool use_context;
  bool curriculum;
  bool classifier;
};
const std::vector<Variant>& ablation_variants();

}  // namespace cxr::cli
