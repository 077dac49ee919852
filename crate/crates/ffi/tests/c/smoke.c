#include <math.h>
#include <stdio.h>
#include "susplab.h"

#define CHECK(x)                                                        \
    do {                                                                \
        enum SlStatus s_ = (x);                                         \
        if (s_ != SL_STATUS_OK) {                                       \
            fprintf(stderr, "%s -> %d: %s\n", #x, (int)s_,              \
                    sl_last_error() ? sl_last_error() : "(none)");      \
            return 1;                                                   \
        }                                                               \
    } while (0)

static double bowl(void *user, double kp, double ki, double kd) {
    (void)user;
    return (kp - 1.0) * (kp - 1.0) + (ki - 1.0) * (ki - 1.0) + (kd - 1.0) * (kd - 1.0);
}

int main(void) {
    SlRoad *road = NULL;
    SlTimeSeries *ts = NULL;
    SlFuzzy *fz = NULL;
    SlMetrics m;
    double gains[3], score, f;

    CHECK(sl_road_generate(7, 20.0, 1e-3, 3.0, &road));
    CHECK(sl_fuzzy_new(0.0, 350.0, &fz));
    CHECK(sl_fuzzy_infer(fz, 0.1, -2.0, 0.005, &f));
    if (!(f >= 0.0 && f <= 350.0)) return 2;
    CHECK(sl_simulate(NULL, fz, road, SL_MODE_SEMI_ACTIVE_FUZZY_PID, 2e4, 2e4, 100.0, 1e-3, &ts));
    CHECK(sl_timeseries_metrics(ts, 1.0, &m));
    if (sl_timeseries_len(ts) != sl_road_len(road) || !(m.rms_accel > 0.0)) return 3;
    if (sl_simulate(NULL, fz, NULL, SL_MODE_ACTIVE, 1, 1, 1, 1e-3, &ts) != SL_STATUS_NULL_POINTER) return 4;
    CHECK(sl_cfoa_minimize(bowl, NULL, 20, 40, 3, gains, &score));
    if (!(score < 0.05)) return 5;

    printf("ok %s rms_accel=%.4f score=%.3g\n", sl_version(), m.rms_accel, score);
    sl_timeseries_free(ts);
    sl_fuzzy_free(fz);
    sl_road_free(road);
    return 0;
}
