// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace relit::io {

enum class ValueType { Int, Real, Bool, String, IntList };

struct KeySpec {
    std::string key;
    ValueType type;
    std::string default_value;
    std::string help;
    std::optional<double> min = std::nullopt;
    std::optional<double> max = std::nullopt;
};

/// Flat key-value configuration validated against a fixed schema.
///
/// Text format, one entry per line:
///
///     # comment
///     data.subjects = 24
///     relight.views = 3, 4
///
/// Keys are dotted identifiers. Unknown keys, malformed values and
/// out-of-range numbers raise Error(ErrorKind::Config) naming the key.
class KvConfig {
public:
    explicit KvConfig(std::vector<KeySpec> schema);

    void load_file(const std::filesystem::path& path);
    void load_text(const std::string& text, const std::string& origin = "<text>");
    /// Applies a `key=value` override.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    long get_int(const std::string& key) const;
    double get_real(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::vector<long> get_int_list(const std::string& key) const;

    bool has_key(const std::string& key) const;
    const std::vector<KeySpec>& schema() const { return schema_; }

    /// Canonical text of the effective configuration, sorted by key.
    std::string to_text() const;
    /// SHA-256 prefix of to_text(); stable identifier for a configuration.
    std::string hash() const;

private:
    const KeySpec& spec(const std::string& key) const;
    void validate(const KeySpec& s, const std::string& value) const;

    std::vector<KeySpec> schema_;
    std::map<std::string, std::string> values_;
};

}  // namespace relit::io
