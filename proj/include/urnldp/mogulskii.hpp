#pragma once
/*
Large deviations of the i.i.d. reference walk whose steps are uniform on
{0,...,K}.

  zeta0(b)  = log( (1 - e^{(K+1)b}) / ((K+1)(1 - e^b)) )      log-mgf
  zeta0'(b) = e^b/(1-e^b) - (K+1) e^{(K+1)b}/(1-e^{(K+1)b})   tilted mean
  L0(a)     = a b* - zeta0(b*),  zeta0'(b*) = a,  xi = e^{b*}

L0 is the Legendre-Fenchel transform (supremum over all real b), so it is
convex, nonnegative, zero at K/2 and equal to log(K+1) at both endpoints.
The shifted gauge subtracts log(K+1).
*/

#include <vector>

#include "urnldp/kron_embedding.hpp"

namespace urnldp {

double zeta0(double beta, int K);
double dzeta0(double beta, int K);
// Variance of the tilted uniform law; the derivative of dzeta0.
double d2zeta0(double beta, int K);

struct XiSolution {
    double alpha;
    int K;
    double xi;
    double beta_star;  // log xi
    double residual;   // |tilted mean - alpha|
};

// Throws std::out_of_range unless 0 < alpha < K.
XiSolution xi_invert(double alpha, int K);

// alpha in [0,K]; endpoints use 0 log 0 = 0.
double mogulskii_lagrangian(double alpha, int K, bool shifted = false);

// Midpoint quadrature of L0 over the path velocities.
double iid_action(const DiscretePath& path, int K, bool shifted = false);

struct MogulskiiRow {
    double alpha, xi, beta_star, l0_unshifted, l0_shifted;
};

// alpha = K*i/grid for i = 0..grid; xi = 0 / inf and beta* = -inf / inf at the endpoints.
std::vector<MogulskiiRow> mogulskii_table(int K, int grid);

}  // namespace urnldp
