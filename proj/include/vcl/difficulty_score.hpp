#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace vcl {

enum class Strategy { Code, Model };

std::string_view to_string(Strategy s);
/// Accepts "code" or "model"; throws ConfigError otherwise.
Strategy parse_strategy(std::string_view text);

/// A sample's scalar difficulty. Lower is easier under both strategies.
struct DifficultyScore {
  std::string sample_id;
  double value = 0.0;
  Strategy strategy = Strategy::Code;
  std::optional<std::size_t> m;  // number of submodels for Strategy::Model

  bool operator==(const DifficultyScore&) const = default;
};

}  // namespace vcl
