#include <stdio.h>
#include <string.h>
#include "cword.h"

int main(void) {
    CwordLexicon *lex = NULL;
    char *content = NULL;
    double b1 = 0.0;

    if (cword_lexicon_builtin(&lex) != CWORD_STATUS_OK) return 1;
    if (cword_extract(lex, "i will take the dog for a walk .", CWORD_MODE_TRAINING, &content) != CWORD_STATUS_OK) return 2;
    printf("%s\n", content);
    int bad = strcmp(content, "i take dog walk .") != 0;
    cword_string_free(content);
    cword_lexicon_free(lex);
    if (bad) return 3;

    if (cword_sentence_bleu("a b c", "a b c", 1, &b1) != CWORD_STATUS_OK || b1 != 100.0) return 4;
    if (cword_sentence_bleu("", "a", 1, &b1) != CWORD_STATUS_INVALID_ARGUMENT) return 5;
    if (cword_last_error() == NULL) return 6;
    return 0;
}
