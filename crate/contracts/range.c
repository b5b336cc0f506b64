/* Comparison-heavy policy: accept strictly increasing triples that start
 * above zero. Lowers to several Boolean submodules, so it makes a good
 * minimizer demonstration at small bit widths. */
struct in_T { unsigned int a; unsigned int b; unsigned int c; };
struct out_T { unsigned int ok; };

void contract(struct in_T *in, struct out_T *out)
{
    unsigned int increasing = (in->a < in->b) & (in->b < in->c);
    unsigned int nonzero = in->a != 0;
    out->ok = increasing & nonzero;
}
