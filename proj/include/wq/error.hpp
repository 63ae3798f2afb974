#ifndef WQ_ERROR_HPP
#define WQ_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wq {

enum class ErrorKind {
    // coeffring
    IncompatibleVariables,
    UnknownVariable,
    NotClosed,
    NoPrimitive,
    NonNilpotentConstantTerm,
    NonInvertibleImage,
    NegativeFloor,
    CapRequired,
    Parse,
    // weyl
    RankMismatch,
    ValidityExhausted,
    NotSymplectic,
    ZeroElement,
    // lagmodule
    IllDefinedAction,
    NotParabolic,
    NotIntegrable,
    // starprod
    ChartMismatch,
    NoSolution,
    NotWeylNormalized,
    // cechdr
    NotCocycle,
    NotAClass,
    NotLagrangian,
    GluingDefect,
    Unsupported,
    // quantcheck
    MissingData,
    InvalidScenario,
};

const char *to_string(ErrorKind kind) noexcept;

/// Every failure in the library is reported as an Error carrying its kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace wq

#endif
