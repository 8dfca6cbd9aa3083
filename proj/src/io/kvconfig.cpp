// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/io/kvconfig.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "relit/core/error.hpp"
#include "relit/core/sha256.hpp"

namespace relit::io {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<long> parse_int(const std::string& s) {
    long v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) return std::nullopt;
    return v;
}

std::optional<double> parse_real(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

Error config_error(const std::string& msg) { return Error(msg, ErrorKind::Config); }

}  // namespace

KvConfig::KvConfig(std::vector<KeySpec> schema) : schema_(std::move(schema)) {
    for (const auto& s : schema_) {
        validate(s, s.default_value);
        values_[s.key] = s.default_value;
    }
}

const KeySpec& KvConfig::spec(const std::string& key) const {
    auto it = std::find_if(schema_.begin(), schema_.end(), [&](const KeySpec& s) { return s.key == key; });
    if (it == schema_.end()) throw config_error("unknown config key '" + key + "'");
    return *it;
}

bool KvConfig::has_key(const std::string& key) const {
    return std::any_of(schema_.begin(), schema_.end(), [&](const KeySpec& s) { return s.key == key; });
}

void KvConfig::validate(const KeySpec& s, const std::string& value) const {
    auto range = [&](double v) {
        if ((s.min && v < *s.min) || (s.max && v > *s.max))
            throw config_error("config key '" + s.key + "' out of range: " + value);
    };
    switch (s.type) {
        case ValueType::Int: {
            auto v = parse_int(value);
            if (!v) throw config_error("config key '" + s.key + "' expects an integer, got '" + value + "'");
            range(static_cast<double>(*v));
            break;
        }
        case ValueType::Real: {
            auto v = parse_real(value);
            if (!v) throw config_error("config key '" + s.key + "' expects a number, got '" + value + "'");
            range(*v);
            break;
        }
        case ValueType::Bool:
            if (value != "true" && value != "false")
                throw config_error("config key '" + s.key + "' expects true/false, got '" + value + "'");
            break;
        case ValueType::String:
            break;
        case ValueType::IntList:
            for (const auto& item : split_list(value)) {
                auto v = parse_int(item);
                if (!v) throw config_error("config key '" + s.key + "' expects integers, got '" + value + "'");
                range(static_cast<double>(*v));
            }
            break;
    }
}

void KvConfig::set(const std::string& key, const std::string& value) {
    const auto& s = spec(key);
    const std::string v = trim(value);
    validate(s, v);
    values_[key] = v;
}

void KvConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw config_error("override '" + assignment + "' is not key=value");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void KvConfig::load_text(const std::string& text, const std::string& origin) {
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

void KvConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path.string(), ErrorKind::Config);
    std::stringstream ss;
    ss << in.rdbuf();
    load_text(ss.str(), path.string());
}

long KvConfig::get_int(const std::string& key) const {
    if (spec(key).type != ValueType::Int) throw Error("config key '" + key + "' is not an integer");
    return *parse_int(values_.at(key));
}

double KvConfig::get_real(const std::string& key) const {
    const auto t = spec(key).type;
    if (t != ValueType::Real && t != ValueType::Int) throw Error("config key '" + key + "' is not numeric");
    return *parse_real(values_.at(key));
}

bool KvConfig::get_bool(const std::string& key) const {
    if (spec(key).type != ValueType::Bool) throw Error("config key '" + key + "' is not a bool");
    return values_.at(key) == "true";
}

std::string KvConfig::get_string(const std::string& key) const {
    spec(key);
    return values_.at(key);
}

std::vector<long> KvConfig::get_int_list(const std::string& key) const {
    if (spec(key).type != ValueType::IntList) throw Error("config key '" + key + "' is not an integer list");
    std::vector<long> out;
    for (const auto& item : split_list(values_.at(key))) out.push_back(*parse_int(item));
    return out;
}

std::string KvConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::string KvConfig::hash() const { return sha256_hex(to_text()).substr(0, 12); }

}  // namespace relit::io
