#include <math.h>
#include <stdio.h>
#include <string.h>

#include "codemix_sarcasm.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    CmsLabel label;
    CHECK(cms_parse_label("The comment is Sarcastic.", &label) == CMS_STATUS_OK);
    CHECK(label == CMS_LABEL_SARCASTIC);

    CmsReport *report = NULL;
    CHECK(cms_report_from_counts(3651, 970, 977, 740, &report) == CMS_STATUS_OK);
    CmsScores macro;
    CHECK(cms_report_average(report, CMS_AVERAGE_MACRO, &macro) == CMS_STATUS_OK);
    CHECK(cms_round_half_up(macro.f1, 2) == 0.61);
    char *text = NULL;
    CHECK(cms_report_to_text(report, &text) == CMS_STATUS_OK);
    CHECK(strstr(text, "Macro avg") != NULL);
    cms_string_free(text);
    cms_report_free(report);

    CmsPublishedReport target = {
        {4621, 1717},
        {{0.79, 0.79, 0.79}, {0.43, 0.43, 0.43}, {0.69, 0.69, 0.69}, {0.61, 0.61, 0.61}, {0.69, 0.69, 0.69}},
    };
    CmsCandidates *found = NULL;
    CHECK(cms_reconstruct(&target, 0.005, &found) == CMS_STATUS_OK);
    CHECK(cms_candidates_len(found) == 579);
    cms_candidates_free(found);

    target.cells[1][0] = NAN;
    target.cells[1][1] = 0.95;
    CHECK(cms_reconstruct(&target, 0.005, &found) == CMS_STATUS_INCONSISTENT);
    CHECK(cms_last_error() != NULL);

    printf("ok %s\n", cms_version());
    return 0;
}
