// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace relit {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
    Other = 1,
    Config = 2,
    MissingPrerequisite = 3,
    UnknownResource = 4,
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ErrorKind kind = ErrorKind::Other)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

/// Raised when a file cannot be read or written; the message names the path.
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace relit
