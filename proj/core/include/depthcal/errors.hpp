#pragma once

#include <stdexcept>
#include <string>

namespace depthcal {

/// Base class of every error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input could not be parsed or fails basic validation.
struct ParseError : Error {
  using Error::Error;
};

/// Advisory frame tags disagree at a module boundary.
struct FrameMismatch : Error {
  using Error::Error;
};

/// Camera-frame z <= 0: the point cannot be projected.
struct PointBehindCamera : Error {
  using Error::Error;
};

/// Undistortion failed to converge; the point lies outside the radius where
/// the distortion polynomial is invertible.
struct NoConvergence : Error {
  using Error::Error;
};

struct TooFewPoses : Error {
  using Error::Error;
};

/// Pivot poses carry too little rotational diversity; the tip is unobservable.
struct DegenerateMotion : Error {
  using Error::Error;
};

struct InsufficientPoints : Error {
  using Error::Error;
};

/// Collinear world points, or an unresolved planar two-fold ambiguity.
struct DegenerateConfiguration : Error {
  using Error::Error;
};

/// No frame of a hand-eye session produced a usable pose.
struct AllFramesFailed : Error {
  using Error::Error;
};

/// Zero baseline or a match at infinity: the triangulation system has no
/// unique solution.
struct RaysNearParallel : Error {
  using Error::Error;
};

/// Triangulated point lies behind one of the cameras (wrong correspondence).
struct NegativeDepth : Error {
  using Error::Error;
};

/// Compared point sets share no (frame, id) keys.
struct EmptyIntersection : Error {
  using Error::Error;
};

/// No caliper-referenced pair has both endpoints available.
struct MissingNeighbor : Error {
  using Error::Error;
};

/// Scene geometry places a required point outside a camera frustum.
struct Unviewable : Error {
  using Error::Error;
};

}  // namespace depthcal
