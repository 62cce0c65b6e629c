#pragma once

#include <stdexcept>
#include <string>

namespace wkstab {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input data malformed or outside the supported envelope.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class UnboundedPolytope : public Error {
public:
    using Error::Error;
};

class EmptyPolytope : public Error {
public:
    using Error::Error;
};

class DegeneratePolytope : public Error {
public:
    using Error::Error;
};

class InvalidPerturbation : public Error {
public:
    using Error::Error;
};

class DegenerateSimplex : public Error {
public:
    using Error::Error;
};

/// Raised when a triangulation does not refine the linearity domains of a
/// piecewise-linear function it is asked to integrate against.
class TriangulationTooCoarse : public Error {
public:
    using Error::Error;
};

class NotConvex : public Error {
public:
    using Error::Error;
};

class PointNotInterior : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class LatticeTooLarge : public Error {
public:
    using Error::Error;
};

}  // namespace wkstab
