#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace avatar {

// Base of every error raised by the library. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

// Raised for non-triangle faces in mesh input.
class UnsupportedTopologyError : public TopologyError {
public:
    using TopologyError::TopologyError;
};

class DegenerateNormalError : public Error {
public:
    DegenerateNormalError(const std::string& what, int vertex) : Error(what), vertex_(vertex) {}
    int vertex() const { return vertex_; }

private:
    int vertex_;
};

class AsymmetryError : public Error {
public:
    AsymmetryError(const std::string& what, std::vector<int> offending)
        : Error(what), offending_(std::move(offending)) {}
    const std::vector<int>& offending() const { return offending_; }

private:
    std::vector<int> offending_;
};

class ConnectivityError : public Error {
public:
    using Error::Error;
};

class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (relative residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class AnnotationError : public Error {
public:
    using Error::Error;
};

class OutOfFrameError : public Error {
public:
    using Error::Error;
};

class NormalizationError : public Error {
public:
    using Error::Error;
};

class ConditioningError : public Error {
public:
    using Error::Error;
};

class OptimizerError : public Error {
public:
    OptimizerError(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class AtlasError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class EmptyVisibilityError : public Error {
public:
    using Error::Error;
};

class EmptySelectionError : public Error {
public:
    using Error::Error;
};

class NoConstraintsError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Wraps the error that aborted a pipeline stage.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& cause)
        : Error("stage '" + stage + "' failed: " + cause), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace avatar
