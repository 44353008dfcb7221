#pragma once

#include <stdexcept>
#include <string>

namespace otfsbf {

// Base class for domain errors raised by the library. Dimension mismatches and
// malformed arguments use std::invalid_argument directly.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Equalization requested with an effective channel eigenvalue too close to zero.
class NearSingularEqualizer : public Error {
public:
    explicit NearSingularEqualizer(const std::string& msg) : Error(msg) {}
};

// Target rate of the wideband stream is not achievable for any beamformer
// (the SINR of that stream is bounded above by 1, i.e. one bit per use).
class InfeasibleTarget : public Error {
public:
    explicit InfeasibleTarget(const std::string& msg) : Error(msg) {}
};

// Worst-case analysis of an all-zero beamformer is undefined.
class ZeroBeamformer : public Error {
public:
    explicit ZeroBeamformer(const std::string& msg) : Error(msg) {}
};

// A linearization point produced an unusable (blown-up) gradient.
class DegenerateDirection : public Error {
public:
    explicit DegenerateDirection(const std::string& msg) : Error(msg) {}
};

// Worst-case channel power is zero: the uncertainty ball contains a channel
// orthogonal to the beamformer, so no finite constraint can be met.
class NulledRegion : public Error {
public:
    explicit NulledRegion(const std::string& msg) : Error(msg) {}
};

// Every random initialization of an iterative design failed.
class AllStartsFailed : public Error {
public:
    explicit AllStartsFailed(const std::string& msg) : Error(msg) {}
};

// The semidefinite relaxation itself is infeasible.
class SdpInfeasible : public Error {
public:
    explicit SdpInfeasible(const std::string& msg) : Error(msg) {}
};

// No randomized candidate extracted from the relaxation passed the constraints.
class NoFeasibleRandomization : public Error {
public:
    explicit NoFeasibleRandomization(const std::string& msg) : Error(msg) {}
};

// Generic numerical breakdown (failed factorization, stalled solve, ...).
class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& msg) : Error(msg) {}
};

}  // namespace otfsbf
