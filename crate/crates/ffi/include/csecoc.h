/* C interface for the csecoc multiclass toolkit.
 *
 * All objects cross the boundary as opaque handles created and destroyed
 * by this library. Functions return a CsecocStatus; on failure,
 * csecoc_last_error_message() describes the problem for the calling
 * thread. See the crate documentation for the full contract.
 */

#ifndef CSECOC_H
#define CSECOC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum CsecocStatus {
  CSECOC_STATUS_OK = 0,
  CSECOC_STATUS_NULL_POINTER = 1,
  CSECOC_STATUS_UTF8 = 2,
  CSECOC_STATUS_IO = 3,
  CSECOC_STATUS_INVALID_ARGUMENT = 4,
  CSECOC_STATUS_TRAINING_FAILED = 5,
  CSECOC_STATUS_PREDICTION_FAILED = 6,
  CSECOC_STATUS_INTERNAL = 7,
} CsecocStatus;

/* Matrix kind codes for csecoc_matrix_build / csecoc_model_train. */
#define CSECOC_KIND_CSECOC 0
#define CSECOC_KIND_DECOC_LIKE 1
#define CSECOC_KIND_OVA 2
#define CSECOC_KIND_OVO 3
#define CSECOC_KIND_DENSE_RANDOM 4
#define CSECOC_KIND_SPARSE_RANDOM 5

/* Learner codes for csecoc_model_train. */
#define CSECOC_LEARNER_KNN 0
#define CSECOC_LEARNER_KERNEL_RIDGE 1

/* Label column codes for csecoc_dataset_load_csv. */
#define CSECOC_LABEL_LAST (-1)
#define CSECOC_LABEL_FIRST (-2)

typedef struct CsecocDataset CsecocDataset;
typedef struct CsecocMatrix CsecocMatrix;
typedef struct CsecocModel CsecocModel;

/* Library version as a static NUL-terminated string. */
const char *csecoc_version(void);

/* Last error message for the calling thread; owned by the library. */
const char *csecoc_last_error_message(void);

/* Dataset loading and introspection. */
CsecocStatus csecoc_dataset_load_csv(const char *path, int label_column,
                                     int has_header, int mean_impute,
                                     CsecocDataset **out);
void csecoc_dataset_free(CsecocDataset *ds);
int csecoc_dataset_num_samples(const CsecocDataset *ds);
int csecoc_dataset_num_features(const CsecocDataset *ds);
int csecoc_dataset_num_classes(const CsecocDataset *ds);

/* Coding matrices. eps <= 0 and candidates <= 0 select the defaults. */
CsecocStatus csecoc_matrix_build(const CsecocDataset *ds, int kind,
                                 uint64_t seed, double eps, int candidates,
                                 CsecocMatrix **out);
void csecoc_matrix_free(CsecocMatrix *matrix);
int csecoc_matrix_num_classes(const CsecocMatrix *matrix);
int csecoc_matrix_num_columns(const CsecocMatrix *matrix);
CsecocStatus csecoc_matrix_get(const CsecocMatrix *matrix, int class_index,
                               int column, double *out);
int csecoc_matrix_is_valid(const CsecocMatrix *matrix);
CsecocStatus csecoc_matrix_write_csv(const CsecocMatrix *matrix,
                                     const char *path);

/* Training, prediction, persistence. gamma <= 0 selects the
 * 1/n_features default for the kernel learner. */
CsecocStatus csecoc_model_train(const CsecocDataset *ds, int kind,
                                int learner, int knn_k, double gamma,
                                double ridge_lambda, int standardize,
                                uint64_t seed, CsecocModel **out);
void csecoc_model_free(CsecocModel *model);
CsecocStatus csecoc_model_predict(const CsecocModel *model,
                                  const double *features, int n_features,
                                  int *out_class);
CsecocStatus csecoc_model_class_name(const CsecocModel *model,
                                     int class_index, char *buffer,
                                     int buffer_len);
CsecocStatus csecoc_model_save(const CsecocModel *model, const char *path);
CsecocStatus csecoc_model_load(const char *path, CsecocModel **out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CSECOC_H */
