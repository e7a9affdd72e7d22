#pragma once

#include <stdexcept>
#include <string>

namespace clickdet {

// Error categories map onto CLI exit codes: Config -> 2, Data -> 3, Runtime -> 4.
enum class ErrorKind { Config, Data, Runtime };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
    throw Error(ErrorKind::Config, msg);
}

[[noreturn]] inline void throw_data(const std::string& msg) {
    throw Error(ErrorKind::Data, msg);
}

[[noreturn]] inline void throw_runtime(const std::string& msg) {
    throw Error(ErrorKind::Runtime, msg);
}

} // namespace clickdet
