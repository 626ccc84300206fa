#pragma once

#include <stdexcept>
#include <string>

namespace qsuff {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error("DimensionMismatch: " + msg) {}
};

struct NonHermitianInput : Error {
  explicit NonHermitianInput(const std::string& msg) : Error("NonHermitianInput: " + msg) {}
};

struct NonHermitianChoi : Error {
  explicit NonHermitianChoi(const std::string& msg) : Error("NonHermitianChoi: " + msg) {}
};

struct NegativeInput : Error {
  explicit NegativeInput(const std::string& msg) : Error("NegativeInput: " + msg) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("DomainError: " + msg) {}
};

struct SingularState : Error {
  explicit SingularState(const std::string& msg) : Error("SingularState: " + msg) {}
};

struct NotJordanClosed : Error {
  explicit NotJordanClosed(const std::string& msg) : Error("NotJordanClosed: " + msg) {}
};

struct NotFaithful : Error {
  explicit NotFaithful(const std::string& msg) : Error("NotFaithful: " + msg) {}
};

struct NontrivialCenter : Error {
  explicit NontrivialCenter(const std::string& msg) : Error("NontrivialCenter: " + msg) {}
};

struct NotInvariant : Error {
  explicit NotInvariant(const std::string& msg) : Error("NotInvariant: " + msg) {}
};

struct InconsistentVerdict : Error {
  explicit InconsistentVerdict(const std::string& msg) : Error("InconsistentVerdict: " + msg) {}
};

struct CertificateInvalid : Error {
  explicit CertificateInvalid(const std::string& msg) : Error("CertificateInvalid: " + msg) {}
};

struct LabelMismatch : Error {
  explicit LabelMismatch(const std::string& msg) : Error("LabelMismatch: " + msg) {}
};

struct NumericalDegeneracy : Error {
  explicit NumericalDegeneracy(const std::string& msg) : Error("NumericalDegeneracy: " + msg) {}
};

struct UnsupportedParameters : Error {
  explicit UnsupportedParameters(const std::string& msg) : Error("UnsupportedParameters: " + msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error("ParseError: " + msg) {}
};

}  // namespace qsuff
