#pragma once

#include <stdexcept>
#include <string>

namespace weakmeter {

// Root of every failure raised by the library. Each subclass names one
// distinguishable physics or configuration failure so callers (the CLI in
// particular) can map them onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Coherent amplitude or displacement does not fit in the truncated space.
class TruncationError : public Error {
public:
    using Error::Error;
};

// Coupling pushed the meter into the top interior_buffer levels.
class TruncationLeak : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ZeroNorm : public Error {
public:
    using Error::Error;
};

class NotHermitian : public Error {
public:
    using Error::Error;
};

class NonHermitianCustom : public NotHermitian {
public:
    using NotHermitian::NotHermitian;
};

// <beta|alpha> vanishes, so the weak value is undefined.
class OrthogonalSelection : public Error {
public:
    using Error::Error;
};

class DegenerateFit : public Error {
public:
    using Error::Error;
};

class NoAcceptedSamples : public Error {
public:
    using Error::Error;
};

// Experiment file failed to parse or validate.
class SpecError : public Error {
public:
    using Error::Error;
};

}  // namespace weakmeter
