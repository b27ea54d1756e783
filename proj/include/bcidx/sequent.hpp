#ifndef BCIDX_SEQUENT_HPP
#define BCIDX_SEQUENT_HPP

#include <string>
#include <vector>

#include "bcidx/term.hpp"

namespace bcidx {

// The formula u~ ~ v~: two equal-length vectors of ground terms.
struct Sequent {
  TermVec left, right;

  size_t size() const { return left.size(); }
  bool operator==(const Sequent& o) const { return left == o.left && right == o.right; }
  bool operator!=(const Sequent& o) const { return !(*this == o); }
};

struct Diag {
  std::string category;  // e.g. "schema", "guard", "freshness", "nodec", "rw", ...
  std::string message;
  std::vector<uint32_t> path;  // proof-tree path (filled by check_proof)
};

// Violations are data, not exceptions: ok + fatal diagnostics + non-fatal notes.
struct Verdict {
  bool ok = true;
  std::vector<Diag> diags;
  std::vector<Diag> notes;

  void fail(std::string category, std::string message) {
    ok = false;
    diags.push_back({std::move(category), std::move(message), {}});
  }
  void note(std::string category, std::string message) {
    notes.push_back({std::move(category), std::move(message), {}});
  }
  void merge(const Verdict& o) {
    ok = ok && o.ok;
    diags.insert(diags.end(), o.diags.begin(), o.diags.end());
    notes.insert(notes.end(), o.notes.begin(), o.notes.end());
  }
};

}  // namespace bcidx

#endif  // BCIDX_SEQUENT_HPP
