#pragma once

#include <stdexcept>
#include <string>

namespace hetfuse {

/// Base class for all numerical / structural failures raised by the library.
class FusionError : public std::runtime_error {
public:
    explicit FusionError(const std::string& what) : std::runtime_error(what) {}
};

/// A variable block that must be inverted is numerically singular,
/// typically because a vague or improper prior is still present.
class SingularBlock : public FusionError {
public:
    explicit SingularBlock(const std::string& what) : FusionError(what) {}
};

/// Requested variables are not part of the distribution / topology.
class UnknownVariable : public FusionError {
public:
    explicit UnknownVariable(const std::string& what) : FusionError(what) {}
};

class UnknownEdge : public FusionError {
public:
    explicit UnknownEdge(const std::string& what) : FusionError(what) {}
};

class DimensionMismatch : public FusionError {
public:
    explicit DimensionMismatch(const std::string& what) : FusionError(what) {}
};

class SingularMatrix : public FusionError {
public:
    explicit SingularMatrix(const std::string& what) : FusionError(what) {}
};

class NotPositiveDefinite : public FusionError {
public:
    explicit NotPositiveDefinite(const std::string& what) : FusionError(what) {}
};

/// A fused information matrix lost positive semi-definiteness beyond
/// tolerance; signals double counting or a deflation mismatch.
class NegativeInformation : public FusionError {
public:
    explicit NegativeInformation(const std::string& what) : FusionError(what) {}
};

class ConfigError : public FusionError {
public:
    explicit ConfigError(const std::string& what) : FusionError(what) {}
};

} // namespace hetfuse
