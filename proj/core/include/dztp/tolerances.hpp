#pragma once

// Every numeric tolerance used by the library, the verification harness and
// the acceptance suite. Values assume binary64 arithmetic at n <= 30, alpha <= 20.

namespace dztp::tol {

// Series truncation defaults.
inline constexpr double kSeriesRelTail = 1e-15;
inline constexpr int kSeriesMaxTerms = 10'000;

// Default certified tail mass for materialized tables.
inline constexpr double kTableTail = 1e-15;

// Relative distance within which lambda is snapped onto 1/m.
inline constexpr double kUnitFractionSnap = 1e-12;

// Kernel identities.
inline constexpr double kFallingFactorialRel = 1e-14;
inline constexpr double kDegenerateExpReciprocal = 1e-12;
inline constexpr double kPartialExpConvergence = 1e-10;
inline constexpr double kStirlingAltSumRel = 1e-9;
inline constexpr double kBellClosedVsSeriesRel = 1e-9;
inline constexpr double kBellLimitRel = 1e-5;
inline constexpr double kBellClassicalBranch = 1e-12;
inline constexpr double kBellLimitLambda = 1e-7;

// Distribution identities.
inline constexpr double kNormalization = 1e-12;
inline constexpr double kConditionalPoisson = 1e-12;
inline constexpr double kLogPmfRel = 1e-12;
inline constexpr double kCdfVsPartialSum = 1e-12;
inline constexpr double kMeanRel = 1e-10;
inline constexpr double kVarianceRel = 1e-9;
inline constexpr double kVarianceFromMomentsRel = 1e-10;
inline constexpr double kVarianceClamp = 1e-12;
inline constexpr double kMomentRel = 1e-9;
inline constexpr double kMomentOneVsMean = 1e-12;
inline constexpr double kMgfDerivativeRel = 1e-4;
inline constexpr double kMgfDerivativeStep = 1e-5;
inline constexpr double kMgfTaylorRel = 1e-3;
// Finite-difference steps for the 2nd/3rd MGF derivatives, divided by the mean.
inline constexpr double kMgfSecondStep = 1e-3;
inline constexpr double kMgfThirdStep = 2e-3;
inline constexpr double kPgfVsTable = 1e-12;
inline constexpr double kClassicalReductionRel = 1e-12;

// Sum distributions.
inline constexpr double kIidAltSumRel = 1e-9;
inline constexpr double kIidConvolutionAbs = 1e-9;
inline constexpr double kPgfFactorization = 1e-9;
inline constexpr double kMeanAdditivityRel = 1e-8;
inline constexpr double kHeteroAbs = 1e-9;

// Monte Carlo.
inline constexpr double kSigmaBand = 3.0;
inline constexpr double kChiSquareSignificance = 1e-3;
inline constexpr double kChiSquareMinExpected = 5.0;

// Enumeration caps.
inline constexpr int kPartitionOracleMaxN = 10;
inline constexpr int kCompositionOracleMaxN = 15;
inline constexpr int kCompositionOracleMaxK = 4;
inline constexpr int kExactStirlingMaxN = 20;
inline constexpr int kDirectPmfMaxN = 20;

}  // namespace dztp::tol
