#pragma once

#include <stdexcept>
#include <string>

namespace eqlab {

enum class ErrorKind {
  SingularPoint,
  NotImplemented,
  Geometry,
  CriticalPoint,
  Bracket,
  NonFinite,
  StencilOutOfDomain,
  IllConditioned,
  ResidualTooLarge,
  OriginOutside,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every exception thrown by the library. The kind tag lets callers
/// (the CLI in particular) map failures onto exit codes without RTTI chains.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& what) : Error(K, what) {}
};

using SingularPoint = KindedError<ErrorKind::SingularPoint>;
using NotImplemented = KindedError<ErrorKind::NotImplemented>;
using GeometryError = KindedError<ErrorKind::Geometry>;
using CriticalPoint = KindedError<ErrorKind::CriticalPoint>;
using BracketError = KindedError<ErrorKind::Bracket>;
using NonFinite = KindedError<ErrorKind::NonFinite>;
using StencilOutOfDomain = KindedError<ErrorKind::StencilOutOfDomain>;
using IllConditioned = KindedError<ErrorKind::IllConditioned>;
using ResidualTooLarge = KindedError<ErrorKind::ResidualTooLarge>;
using OriginOutside = KindedError<ErrorKind::OriginOutside>;
using ConfigError = KindedError<ErrorKind::Config>;

}  // namespace eqlab
