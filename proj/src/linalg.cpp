#include "overcrit/linalg.hpp"

#include <Eigen/SVD>

namespace overcrit {

double hermiticity_defect(const Matrix& a)
{
    const double scale = a.norm();
    const double diff = (a - a.adjoint()).norm();
    return scale > 0.0 ? diff / scale : diff;
}

double unitarity_defect(const Matrix& u)
{
    return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

double operator_norm(const Matrix& a)
{
    if (a.size() == 0)
        return 0.0;
    Eigen::BDCSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

} // namespace overcrit
