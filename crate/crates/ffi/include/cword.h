#ifndef CWORD_H
#define CWORD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Extraction mode for `cword_extract`.
 */
#define CWORD_MODE_TRAINING 0

#define CWORD_MODE_EVALUATION 1

typedef enum CwordStatus {
  CWORD_STATUS_OK = 0,
  CWORD_STATUS_NULL_ARGUMENT = 1,
  CWORD_STATUS_INVALID_UTF8 = 2,
  CWORD_STATUS_INVALID_ARGUMENT = 3,
  CWORD_STATUS_IO = 4,
  CWORD_STATUS_MODEL = 5,
  CWORD_STATUS_PANIC = 6,
} CwordStatus;

/**
 * Opaque function-word lexicon.
 */
typedef struct CwordLexicon CwordLexicon;

/**
 * Opaque trained model with its vocabulary.
 */
typedef struct CwordModel CwordModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library.
 */
const char *cword_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cword_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void cword_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum CwordStatus cword_lexicon_builtin(struct CwordLexicon **out);

/**
 * Reads a lexicon file (`category: word word ...` lines).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CwordStatus cword_lexicon_load(const char *path, struct CwordLexicon **out);

/**
 * # Safety
 * `lex` must be null or a handle from this library, freed once.
 */
void cword_lexicon_free(struct CwordLexicon *lex);

/**
 * Content sequence of a space-tokenized sentence, space-joined.
 *
 * # Safety
 * Pointers must be valid; `*out` receives a string for `cword_string_free`.
 */
enum CwordStatus cword_extract(const struct CwordLexicon *lex,
                               const char *sentence,
                               int mode,
                               char **out);

/**
 * # Safety
 * `word` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CwordStatus cword_lemmatize(const char *word, char **out);

/**
 * Sentence BLEU of order `n` (1 or 2) in percent, on space-tokenized text.
 *
 * # Safety
 * String arguments must be NUL-terminated and `out` valid.
 */
enum CwordStatus cword_sentence_bleu(const char *reference,
                                     const char *hypothesis,
                                     int n,
                                     double *out);

/**
 * Share of reference content types found in the hypothesis, in percent.
 * Both arguments are space-joined content sequences.
 *
 * # Safety
 * String arguments must be NUL-terminated and `out` valid.
 */
enum CwordStatus cword_content_coverage(const char *reference, const char *hypothesis, double *out);

/**
 * Loads a checkpoint directory and the vocabulary it was trained with.
 *
 * # Safety
 * String arguments must be NUL-terminated and `out` valid.
 */
enum CwordStatus cword_model_load(const char *checkpoint_dir,
                                  const char *vocab_path,
                                  struct CwordModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library, freed once.
 */
void cword_model_free(struct CwordModel *model);

/**
 * Greedy two-step generation. `context` is raw text; it is tokenized and
 * split into sentences, and the last ones up to the model's window are
 * used. `*content` is empty for models without a content decoder.
 *
 * # Safety
 * `model` must be a live handle, `context` NUL-terminated, and both output
 * pointers valid.
 */
enum CwordStatus cword_model_generate(const struct CwordModel *model,
                                      const char *context,
                                      char **content,
                                      char **response);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CWORD_H */
