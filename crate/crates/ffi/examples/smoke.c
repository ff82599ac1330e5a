#include <stdio.h>
#include "aniso.h"
int main(void) {
  AnisoNorm *n; AnisoYoung *y; AnisoOperator *op; AnisoDomain *d; AnisoSolution *s;
  if (aniso_norm_new_euclidean(&n) != ANISO_STATUS_OK) return 1;
  aniso_young_new_power(2.0, &y);
  aniso_operator_new(n, y, 0.0, &op);
  double xi[2] = {3, 4}, out[2];
  aniso_operator_stress(op, xi, out);
  printf("stress %g %g\n", out[0], out[1]);
  AnisoStatus st = aniso_operator_jacobian(op, xi, out);
  printf("jacobian status %d: %s\n", st, aniso_last_error_message());
  aniso_domain_new_disk(1.0, &d);
  aniso_solve(op, d, 4.0, 0.1, &s);
  size_t len = aniso_solution_len(s); double vals[4096];
  aniso_solution_copy(s, NULL, vals);
  printf("len %zu u0 %g version %s\n", len, vals[0], aniso_version());
  aniso_solution_free(s); aniso_domain_free(d); aniso_operator_free(op); aniso_young_free(y); aniso_norm_free(n);
  return 0;
}
