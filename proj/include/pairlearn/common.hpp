#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace pairlearn {

// Dense row-major storage throughout; no sparse path.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
  // linalg
  NonSquare,
  ExcessiveAsymmetry,
  ConvergenceFailure,
  DimensionMismatch,
  DivisionByNearZero,
  ZeroDivisor,
  // kernels
  RaggedInput,
  NegativeDistance,
  AsymmetricInput,
  SizeOverflow,
  AllSameClass,
  NotPositiveSemiDefinite,
  NonFinite,
  // models
  IdMismatch,
  SingularSystem,
  ITNewTask,
  // holdout
  DenominatorUnderflow,
  NoTrainingData,
  UnsupportedCombination,
  // metrics
  DegenerateClasses,
  NoValidSlices,
  NoComparablePairs,
  InvalidLabels,
  // io
  ParseError,
  IdCollision,
  NonSquareKernel,
  MissingId,
  IoFailure,
  // cli
  InvalidArgument,
};

// Exit-code classes used by the CLI: 1 usage, 2 data, 3 numeric.
enum class ErrorClass : int { usage = 1, data = 2, numeric = 3 };

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::ExcessiveAsymmetry: return "ExcessiveAsymmetry";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DivisionByNearZero: return "DivisionByNearZero";
    case ErrorCode::ZeroDivisor: return "ZeroDivisor";
    case ErrorCode::RaggedInput: return "RaggedInput";
    case ErrorCode::NegativeDistance: return "NegativeDistance";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::SizeOverflow: return "SizeOverflow";
    case ErrorCode::AllSameClass: return "AllSameClass";
    case ErrorCode::NotPositiveSemiDefinite: return "NotPositiveSemiDefinite";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ITNewTask: return "ITNewTask";
    case ErrorCode::DenominatorUnderflow: return "DenominatorUnderflow";
    case ErrorCode::NoTrainingData: return "NoTrainingData";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::DegenerateClasses: return "DegenerateClasses";
    case ErrorCode::NoValidSlices: return "NoValidSlices";
    case ErrorCode::NoComparablePairs: return "NoComparablePairs";
    case ErrorCode::InvalidLabels: return "InvalidLabels";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IdCollision: return "IdCollision";
    case ErrorCode::NonSquareKernel: return "NonSquareKernel";
    case ErrorCode::MissingId: return "MissingId";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

inline ErrorClass error_class(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnsupportedCombination:
      return ErrorClass::usage;
    case ErrorCode::ExcessiveAsymmetry:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::DivisionByNearZero:
    case ErrorCode::ZeroDivisor:
    case ErrorCode::SingularSystem:
    case ErrorCode::DenominatorUnderflow:
      return ErrorClass::numeric;
    default:
      return ErrorClass::data;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorClass error_class() const { return pairlearn::error_class(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) fail(code, message);
}

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) fail(ErrorCode::NonFinite, what + " contains NaN or Inf entries");
}

// vec(.) is column stacking: the flat index of pair (instance i, task j) is m*j + i.
// Every module shares this convention.
inline Index vec_index(Index i, Index j, Index m) { return m * j + i; }

inline Vector vec(const Matrix& y) {
  Vector v(y.rows() * y.cols());
  for (Index j = 0; j < y.cols(); ++j)
    for (Index i = 0; i < y.rows(); ++i) v[vec_index(i, j, y.rows())] = y(i, j);
  return v;
}

inline Matrix unvec(const Vector& v, Index m, Index q) {
  require(v.size() == m * q, ErrorCode::DimensionMismatch, "unvec: size mismatch");
  Matrix y(m, q);
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < m; ++i) y(i, j) = v[vec_index(i, j, m)];
  return y;
}

// Concurrency cap: PAIRLEARN_THREADS, else hardware concurrency.
inline unsigned thread_cap() {
  if (const char* env = std::getenv("PAIRLEARN_THREADS")) {
    long n = std::atol(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace pairlearn
