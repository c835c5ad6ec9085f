// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sublora/train.hpp"

namespace sublora {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain "key = value" lines; '#' starts a comment. Unknown keys and
/// malformed values raise ConfigError naming the line. Keys not mentioned
/// keep their RunConfig defaults. `corpus_file` is resolved against `base_dir`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// The inverse of parse_run_config (corpus text is not written back).
std::string format_run_config(const RunConfig& config);

}  // namespace sublora
