#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logicloss {

// Index of a declared label within a LabelSet.
using Label = int;

// Predicate marker for "the label this example was annotated with". It is
// resolved against per-example gold labels instead of a fixed declared label.
inline constexpr Label kGoldLabel = -1;

// The finite label vocabulary declared at the top of a rule file. Fixed per
// rule set; label order is the declaration order and is used everywhere
// (probability vectors, argmax tie-breaking, checkpoints).
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(Label i) const { return names_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<Label> find(std::string_view name) const;

  bool operator==(const LabelSet& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
};

}  // namespace logicloss
