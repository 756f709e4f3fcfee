#include <algorithm>
#include <cmath>

#include "cutler/error.hpp"
#include "cutler/postprocess.hpp"

namespace cutler {

double score_mask(const EigenSolution& eigen, const PatchMask& mask) {
  const auto& x = eigen.vector;
  if (x.size() != static_cast<Eigen::Index>(mask.size()))
    throw Error(Errc::invalid_argument, "eigenvector length does not match the mask");
  if (mask.empty()) throw Error(Errc::empty_mask, "cannot score an empty mask");
  const double peak = x.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) sum += std::abs(x[static_cast<Eigen::Index>(i)]) / peak;
  return std::clamp(sum / static_cast<double>(mask.count()), 0.0, 1.0);
}

}  // namespace cutler
