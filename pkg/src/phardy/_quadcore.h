#ifndef PH_QUADCORE_H
#define PH_QUADCORE_H

#include <stdint.h>

void ph_line_weight_graph(int64_t N, double p, double *out);
void ph_line_weight_formula(int64_t N, double p, double *out);
double ph_line_cutoff_energy(int64_t ncut, double p, int64_t *support_out);

#endif
