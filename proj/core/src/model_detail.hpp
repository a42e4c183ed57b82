#pragma once

#include "causalift/models.hpp"

#include <string>
#include <vector>

namespace causalift::detail {

std::vector<std::string> default_schema(Eigen::Index columns);

/// Row/finite checks shared by every fit; fills an empty schema with x0, x1, ...
void check_training_data(const Matrix& X, const Vector& y, std::vector<std::string>& schema, const char* who);

Vector predict_ensemble(const TreeEnsemble& ensemble, const Matrix& X);
Vector predict_mlp(const MlpModel& net, const Matrix& X);

}  // namespace causalift::detail
