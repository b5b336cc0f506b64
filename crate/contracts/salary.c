/* Average-salary policy for four employees. "mean(s) > 32500" needs a
 * division, so it is rewritten over the integers: sum(s) > 32500 * 4.
 * Compile with a bit width of at least 18 so the threshold fits. */
struct in_T { unsigned int s[4]; };
struct out_T { unsigned int ok; };

void contract(struct in_T *in, struct out_T *out)
{
    unsigned int total = 0;
    for (int i = 0; i < 4; i++) {
        total += in->s[i];
    }
    out->ok = total > 130000;
}
