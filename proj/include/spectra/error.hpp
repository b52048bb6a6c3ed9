#pragma once

#include <stdexcept>
#include <string>

namespace spectra {

enum class ErrorKind { dimension, parse, contract, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::parse: return "parse";
    case ErrorKind::contract: return "contract";
    case ErrorKind::numerical: return "numerical";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorKind k, const std::string& what) { throw Error(k, what); }

inline void require_dim(bool ok, const std::string& what)
{
    if (!ok)
        fail(ErrorKind::dimension, what);
}

} // namespace spectra
