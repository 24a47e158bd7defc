#pragma once

#include <stdexcept>
#include <string>

namespace tubetrace {

/// Base class of everything the library throws on bad input or failed processing.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A lifted target (or grid node) has no finite geodesic distance from the source.
class UnreachableError : public Error {
 public:
  UnreachableError() : Error("unreachable") {}
  using Error::Error;
};

}  // namespace tubetrace
