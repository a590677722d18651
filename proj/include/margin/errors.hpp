#pragma once

#include <stdexcept>
#include <string>

namespace margin {

// Base of every error raised by the library. The CLI maps it to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class InvalidLattice : public Error {
public:
    using Error::Error;
};

class InvalidArguments : public Error {
public:
    using Error::Error;
};

// Root finder could not bracket a sign change.
class NoSolution : public Error {
public:
    NoSolution(const std::string& what, double search_limit, double residual)
        : Error(what), search_limit_(search_limit), residual_(residual) {}

    double search_limit() const noexcept { return search_limit_; }
    double residual() const noexcept { return residual_; }

private:
    double search_limit_;
    double residual_;
};

class NotReachedWithinCap : public Error {
public:
    NotReachedWithinCap(const std::string& what, long cap) : Error(what), cap_(cap) {}
    long cap() const noexcept { return cap_; }

private:
    long cap_;
};

// Shadow rate does not exceed the cost of funds, so there is no margin demand to price.
class NoDemand : public Error {
public:
    using Error::Error;
};

// A sign analysis guaranteed a bracket and it was not there. Internal error.
class BracketFailure : public Error {
public:
    using Error::Error;
};

}  // namespace margin
