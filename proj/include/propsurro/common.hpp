#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace propsurro {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ------------------------------- Errors -------------------------------
//
// One exception class per failure kind so callers (and tests) can
// discriminate without parsing messages.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch final : Error {
    using Error::Error;
};

struct NotPositiveDefinite final : Error {
    int pivot;
    explicit NotPositiveDefinite(int pivot_index)
        : Error("matrix not positive definite at pivot " + std::to_string(pivot_index)),
          pivot(pivot_index) {}
};

struct NonFiniteObjective final : Error {
    using Error::Error;
};

struct NonFiniteLoss final : Error {
    long step;
    double loss;
    NonFiniteLoss(long step_index, double loss_value)
        : Error("non-finite loss " + std::to_string(loss_value) + " at step " +
                std::to_string(step_index)),
          step(step_index), loss(loss_value) {}
};

struct MissingColumn final : Error {
    std::string column;
    explicit MissingColumn(const std::string& name)
        : Error("missing required column '" + name + "'"), column(name) {}
};

struct NonNumericCell final : Error {
    long row;
    NonNumericCell(long row_index, const std::string& cell)
        : Error("non-numeric cell '" + cell + "' at data row " + std::to_string(row_index)),
          row(row_index) {}
};

struct NonPositiveValue final : Error {
    using Error::Error;
};

struct EmptyDataset final : Error {
    using Error::Error;
};

struct DuplicateKey final : Error {
    using Error::Error;
};

struct KeyCollision final : Error {
    using Error::Error;
};

struct ZeroVariance final : Error {
    std::string feature;
    explicit ZeroVariance(const std::string& feature_name)
        : Error("feature '" + feature_name + "' has zero variance"), feature(feature_name) {}
};

struct LengthMismatch final : Error {
    using Error::Error;
};

struct ZeroTruthValue final : Error {
    using Error::Error;
};

struct ConstantTruth final : Error {
    using Error::Error;
};

struct ZeroMean final : Error {
    using Error::Error;
};

struct OutOfDomain final : Error {
    using Error::Error;
};

struct ConfigError final : Error {
    using Error::Error;
};

struct ModelIoError final : Error {
    using Error::Error;
};

// ------------------------------- Prediction -------------------------------

// Predictive mean/variance in output units. n_samples is 0 for closed-form
// predictors and the Monte Carlo draw count otherwise.
struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
    long n_samples = 0;
};

}  // namespace propsurro
