#ifndef DMOD_ERRORS_HPP
#define DMOD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dmod {

enum class ErrorKind {
    validation,
    domain,
    quadrature,
    degenerate_calibration,
    parse,
    io,
};

/// Base of every error thrown by the library. `kind()` lets callers (the CLI in
/// particular) map failures onto exit codes without a catch clause per type.
class error : public std::runtime_error {
public:
    error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct validation_error : error {
    explicit validation_error(const std::string& what) : error(ErrorKind::validation, what) {}
};

struct domain_error : error {
    explicit domain_error(const std::string& what) : error(ErrorKind::domain, what) {}
};

struct quadrature_error : error {
    explicit quadrature_error(const std::string& what) : error(ErrorKind::quadrature, what) {}
};

struct degenerate_calibration_error : error {
    explicit degenerate_calibration_error(const std::string& what)
        : error(ErrorKind::degenerate_calibration, what) {}
};

struct parse_error : error {
    parse_error(const std::string& what, std::size_t line)
        : error(ErrorKind::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct io_error : error {
    explicit io_error(const std::string& what) : error(ErrorKind::io, what) {}
};

/// Rethrows `e` with `context` prepended, keeping its kind.
[[noreturn]] inline void rethrow_with_context(const error& e, const std::string& context) {
    throw error(e.kind(), context + ": " + e.what());
}

} // namespace dmod

#endif // DMOD_ERRORS_HPP
