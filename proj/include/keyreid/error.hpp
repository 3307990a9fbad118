// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace keyreid {

enum class ErrorCategory {
    parameter,
    not_found,
    validation,
    input,
    config,
    io,
    evaluation,
};

std::string_view category_name(ErrorCategory category);

/// Base of every exception thrown by the library. The category is what the
/// CLI prefixes its error messages with.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define KEYREID_DEFINE_ERROR(Name, Category)                                     \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& message) : Error(Category, message) {} \
    }

KEYREID_DEFINE_ERROR(ParameterError, ErrorCategory::parameter);
KEYREID_DEFINE_ERROR(NotFoundError, ErrorCategory::not_found);
KEYREID_DEFINE_ERROR(ValidationError, ErrorCategory::validation);
KEYREID_DEFINE_ERROR(InputError, ErrorCategory::input);
KEYREID_DEFINE_ERROR(ConfigError, ErrorCategory::config);
KEYREID_DEFINE_ERROR(IoError, ErrorCategory::io);
KEYREID_DEFINE_ERROR(EvaluationError, ErrorCategory::evaluation);

#undef KEYREID_DEFINE_ERROR

}  // namespace keyreid
