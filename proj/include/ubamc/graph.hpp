#ifndef UBAMC_GRAPH_HPP
#define UBAMC_GRAPH_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace ubamc::graph {

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct SccDecomposition {
  // Components in reverse topological order: no edge leads from a component
  // to one listed after it. Members of each component are sorted.
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> component_of;
};

/// Tarjan's algorithm, iterative. `successors(v)` must return an iterable
/// range of vertex indices.
template <class Successors>
SccDecomposition tarjan_scc(std::size_t n, Successors&& successors) {
  SccDecomposition out;
  out.component_of.assign(n, kNone);
  std::vector<std::size_t> index(n, kNone);
  std::vector<std::size_t> lowlink(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::size_t next_index = 0;

  using Range = decltype(successors(std::size_t{0}));
  using Iter = decltype(std::begin(std::declval<Range&>()));
  struct Frame {
    std::size_t v;
    Range range;
    Iter it;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    auto push = [&](std::size_t v) {
      index[v] = lowlink[v] = next_index++;
      stack.push_back(v);
      on_stack[v] = 1;
      call.push_back(Frame{v, successors(v), {}});
      call.back().it = std::begin(call.back().range);
    };
    push(root);
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.it != std::end(f.range)) {
        const std::size_t w = *f.it;
        ++f.it;
        if (index[w] == kNone) {
          push(w);
        } else if (on_stack[w]) {
          lowlink[f.v] = std::min(lowlink[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) {
        lowlink[call.back().v] = std::min(lowlink[call.back().v], lowlink[v]);
      }
      if (lowlink[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          out.component_of[w] = out.components.size();
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.components.push_back(std::move(comp));
      }
    }
  }
  return out;
}

}  // namespace ubamc::graph

#endif  // UBAMC_GRAPH_HPP
