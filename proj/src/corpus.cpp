#include "vcl/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "vcl/util.hpp"

namespace vcl {

using nlohmann::json;

Dataset::Dataset(std::string name, std::vector<FunctionSample> samples)
    : name_(std::move(name)), samples_(std::move(samples)) {
  index_.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.label != 0 && s.label != 1)
      throw DataError("sample '" + s.id + "': label must be 0 or 1");
    if (trim(s.code).empty()) throw DataError("sample '" + s.id + "': empty code");
    if (!index_.emplace(s.id, i).second) throw DataError("duplicate id '" + s.id + "'");
  }
}

const FunctionSample* Dataset::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &samples_[it->second];
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count_if(
      samples_.begin(), samples_.end(), [label](const auto& s) { return s.label == label; }));
}

Dataset Dataset::select(const std::vector<std::string>& ids, std::string name) const {
  std::vector<FunctionSample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto* s = find(id);
    if (!s) throw DataError("unknown sample id '" + id + "' in dataset '" + name_ + "'");
    out.push_back(*s);
  }
  return Dataset(std::move(name), std::move(out));
}

Dataset parse_jsonl(std::istream& in, std::string name) {
  std::vector<FunctionSample> samples;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DataError(name + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) fail("expected a JSON object");
    for (const char* key : {"id", "code", "label"})
      if (!obj.contains(key)) fail(std::string("missing required key \"") + key + "\"");
    if (!obj["id"].is_string()) fail("\"id\" must be a string");
    if (!obj["code"].is_string()) fail("\"code\" must be a string");
    if (!obj["label"].is_number_integer()) fail("\"label\" must be an integer");

    FunctionSample s;
    s.id = obj["id"].get<std::string>();
    s.code = obj["code"].get<std::string>();
    const auto label = obj["label"].get<long long>();
    if (label != 0 && label != 1) fail("label must be 0 or 1");
    s.label = static_cast<int>(label);
    if (obj.contains("project") && !obj["project"].is_null()) {
      if (!obj["project"].is_string()) fail("\"project\" must be a string");
      s.project = obj["project"].get<std::string>();
    }
    if (trim(s.code).empty()) fail("empty code");
    if (auto [it, fresh] = seen.emplace(s.id, line_no); !fresh)
      fail("duplicate id '" + s.id + "' (first seen on line " + std::to_string(it->second) + ")");
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(name), std::move(samples));
}

Dataset ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  return parse_jsonl(in, path.stem().string());
}

void write_jsonl(std::ostream& out, const Dataset& d) {
  for (const auto& s : d) {
    json obj{{"id", s.id}, {"code", s.code}, {"label", s.label}};
    if (s.project) obj["project"] = *s.project;
    out << obj.dump() << '\n';
  }
}

namespace {

// Sample indices grouped by label (a single group when not stratifying),
// each group shuffled.
std::vector<std::vector<std::size_t>> shuffled_groups(const Dataset& d, bool stratify, Rng& rng) {
  std::vector<std::vector<std::size_t>> groups(stratify ? 2 : 1);
  for (std::size_t i = 0; i < d.size(); ++i)
    groups[stratify ? static_cast<std::size_t>(d[i].label) : 0].push_back(i);
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  for (auto& g : groups) shuffle(std::span<std::size_t>(g), rng);
  return groups;
}

// Splits `target` across groups in proportion to their sizes (largest
// remainder), never exceeding `capacity`.
std::vector<std::size_t> allocate(std::size_t target, const std::vector<std::size_t>& sizes,
                                  const std::vector<std::size_t>& capacity) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> quota(sizes.size());
  std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder, group)
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const std::size_t scaled = target * sizes[g];
    quota[g] = std::min(scaled / total, capacity[g]);
    assigned += quota[g];
    remainders.emplace_back(scaled % total, g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  while (assigned < target) {
    bool progressed = false;
    for (const auto& [rem, g] : remainders) {
      if (assigned == target) break;
      if (quota[g] < capacity[g]) {
        ++quota[g];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return quota;
}

Dataset gather(const Dataset& d, std::vector<std::size_t> indices, const std::string& name) {
  std::sort(indices.begin(), indices.end());
  std::vector<FunctionSample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(d[i]);
  return Dataset(name, std::move(out));
}

}  // namespace

SplitResult split(const Dataset& d, const SplitSpec& spec) {
  if (d.size() < 10)
    throw DataError("dataset '" + d.name() + "' has " + std::to_string(d.size()) +
                    " samples; splitting needs at least 10");
  for (auto p : spec.parts)
    if (p == 0) throw ConfigError("split fractions must all be positive");
  const std::size_t whole = spec.parts[0] + spec.parts[1] + spec.parts[2];
  const std::size_t n = d.size();
  const std::size_t valid_n = n * spec.parts[1] / whole;
  const std::size_t test_n = n * spec.parts[2] / whole;

  Rng rng(spec.seed);
  auto groups = shuffled_groups(d, spec.stratify, rng);
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) sizes.push_back(g.size());

  const auto valid_q = allocate(valid_n, sizes, sizes);
  std::vector<std::size_t> left(sizes.size());
  for (std::size_t g = 0; g < sizes.size(); ++g) left[g] = sizes[g] - valid_q[g];
  const auto test_q = allocate(test_n, sizes, left);

  std::vector<std::size_t> train_idx, valid_idx, test_idx;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& grp = groups[g];
    std::size_t k = 0;
    for (; k < valid_q[g]; ++k) valid_idx.push_back(grp[k]);
    for (; k < valid_q[g] + test_q[g]; ++k) test_idx.push_back(grp[k]);
    for (; k < grp.size(); ++k) train_idx.push_back(grp[k]);
  }
  return {gather(d, std::move(train_idx), d.name() + "/train"),
          gather(d, std::move(valid_idx), d.name() + "/valid"),
          gather(d, std::move(test_idx), d.name() + "/test")};
}

std::vector<Dataset> partition_uniform(const Dataset& d, std::size_t m, std::uint64_t seed,
                                       bool stratify) {
  if (m < 2) throw ConfigError("partition_uniform: m must be at least 2");
  if (d.size() < m)
    throw DataError("cannot partition " + std::to_string(d.size()) + " samples into " +
                    std::to_string(m) + " subsets");
  Rng rng(seed);
  const auto groups = shuffled_groups(d, stratify, rng);
  std::vector<std::vector<std::size_t>> parts(m);
  std::size_t slot = 0;
  for (const auto& g : groups)
    for (auto i : g) parts[slot++ % m].push_back(i);

  std::vector<Dataset> out;
  out.reserve(m);
  for (std::size_t k = 0; k < m; ++k)
    out.push_back(gather(d, std::move(parts[k]), d.name() + "/part" + std::to_string(k)));
  return out;
}

}  // namespace vcl
