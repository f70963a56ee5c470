#pragma once

#include <stdexcept>
#include <string>

namespace hermflow {

struct GeometryMismatch : std::runtime_error {
    explicit GeometryMismatch(const std::string& what) : std::runtime_error("geometry mismatch: " + what) {}
};

struct NanInput : std::runtime_error {
    explicit NanInput(const std::string& what) : std::runtime_error("non-finite input: " + what) {}
};

struct NonPositiveForm : std::runtime_error {
    explicit NonPositiveForm(const std::string& what) : std::runtime_error("form not positive: " + what) {}
};

struct WrongArity : std::runtime_error {
    explicit WrongArity(const std::string& what) : std::runtime_error("wrong arity: " + what) {}
};

struct UnsupportedGeometry : std::runtime_error {
    explicit UnsupportedGeometry(const std::string& what) : std::runtime_error("unsupported geometry: " + what) {}
};

struct UntrackedSubvariety : std::runtime_error {
    explicit UntrackedSubvariety(const std::string& what) : std::runtime_error("untracked subvariety: " + what) {}
};

struct LineSearchStall : std::runtime_error {
    explicit LineSearchStall(const std::string& what) : std::runtime_error("line search stall: " + what) {}
};

struct MaxIterations : std::runtime_error {
    explicit MaxIterations(const std::string& what) : std::runtime_error("max iterations: " + what) {}
};

struct PositivityLoss : std::runtime_error {
    explicit PositivityLoss(const std::string& what) : std::runtime_error("positivity loss: " + what) {}
};

struct NonMonotoneLadder : std::runtime_error {
    explicit NonMonotoneLadder(const std::string& what) : std::runtime_error("non-monotone ladder: " + what) {}
};

struct StepFailure : std::runtime_error {
    explicit StepFailure(const std::string& what) : std::runtime_error("step failure: " + what) {}
};

struct BracketFailure : std::runtime_error {
    explicit BracketFailure(const std::string& what) : std::runtime_error("bracket failure: " + what) {}
};

struct SolverFailure : std::runtime_error {
    explicit SolverFailure(const std::string& what) : std::runtime_error("solver failure: " + what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error("config error: " + what) {}
};

} // namespace hermflow
