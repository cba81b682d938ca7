#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace vcl {

/// One labeled source function. label is 1 for vulnerable, 0 for normal.
struct FunctionSample {
  std::string id;
  std::string code;
  int label = 0;
  std::optional<std::string> project;

  bool operator==(const FunctionSample&) const = default;
};

/// Immutable ordered collection of samples with unique ids. Iteration order is
/// the ingestion order and anchors every downstream tie-break.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DataError on duplicate ids, labels outside {0,1} or blank code.
  Dataset(std::string name, std::vector<FunctionSample> samples);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const FunctionSample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<FunctionSample>& samples() const noexcept { return samples_; }
  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  const FunctionSample* find(const std::string& id) const;
  std::size_t count_label(int label) const;
  bool has_both_labels() const { return count_label(0) > 0 && count_label(1) > 0; }

  /// Samples with the given ids, in the order the ids are listed.
  Dataset select(const std::vector<std::string>& ids, std::string name) const;

  bool operator==(const Dataset& other) const {
    return name_ == other.name_ && samples_ == other.samples_;
  }

 private:
  std::string name_;
  std::vector<FunctionSample> samples_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Train/valid/test proportions as parts of a common whole (default 8:1:1).
struct SplitSpec {
  std::array<std::uint32_t, 3> parts{8, 1, 1};
  std::uint64_t seed = 0;
  bool stratify = true;
};

struct SplitResult {
  Dataset train;
  Dataset valid;
  Dataset test;
};

Dataset ingest_jsonl(const std::filesystem::path& path);
Dataset parse_jsonl(std::istream& in, std::string name);
void write_jsonl(std::ostream& out, const Dataset& d);

/// Valid and test sizes are floor(fraction * n); the remainder goes to train.
/// Requires at least 10 samples.
SplitResult split(const Dataset& d, const SplitSpec& spec);

/// m disjoint subsets whose sizes differ by at most one. With stratify each
/// label is dealt round-robin so per-subset class counts also differ by <= 1.
std::vector<Dataset> partition_uniform(const Dataset& d, std::size_t m,
                                       std::uint64_t seed, bool stratify = true);

}  // namespace vcl
