"""Published accuracy matrix (Gaussian kernel, 20 datasets x 6 learners)."""
import numpy as np

LEARNERS = ("knn", "wnn", "kernn", "krv", "rvm_gauss", "rvm_bern")

DATASETS = (
    "WBCD", "Australia", "Heart", "Teaching", "Iono", "Pima", "Bupa", "Shuttle", "Parkinson", "Titanic",
    "Sonar", "Iris", "Wine", "Balance", "Vehicle", "Nursery", "Zoo", "Segment", "Ecoli", "Pendigit",
)

GAUSSIAN_ACCURACY = np.array([
    [0.9011, 0.9302, 0.9267, 0.9419, 0.6964, 0.9490],
    [0.8845, 0.9226, 0.9191, 0.9372, 0.8519, 0.8415],
    [0.8702, 0.8517, 0.8626, 0.8593, 0.8633, 0.8180],
    [0.6286, 0.6492, 0.6484, 0.7978, 0.7691, 0.7572],
    [0.8080, 0.8055, 0.8166, 0.9105, 0.8638, 0.8502],
    [0.7325, 0.7392, 0.7382, 0.7771, 0.7410, 0.7441],
    [0.5611, 0.5640, 0.5522, 0.6973, 0.7164, 0.6912],
    [0.9047, 0.9255, 0.9252, 0.9747, 0.9817, 0.9854],
    [0.7703, 0.7801, 0.7844, 0.8732, 0.9349, 0.8975],
    [0.8045, 0.8059, 0.8045, 0.7950, 0.7703, 0.7718],
    [0.8245, 0.8207, 0.8218, 0.8476, 0.6167, 0.7833],
    [0.9000, 0.9424, 0.9333, 0.9511, 0.9347, 0.9372],
    [0.9050, 0.9112, 0.9140, 0.9963, 0.9636, 0.9657],
    [0.8748, 0.8805, 0.8855, 0.9390, 0.9371, 0.9177],
    [0.7505, 0.7522, 0.7548, 0.7377, 0.7317, 0.7325],
    [0.9272, 0.9320, 0.9351, 0.9275, 0.9028, 0.9112],
    [0.9433, 0.9514, 0.9503, 0.9402, 0.9139, 0.9364],
    [0.7422, 0.7503, 0.7496, 0.9356, 0.8396, 0.8375],
    [0.7840, 0.7778, 0.7919, 0.8686, 0.8547, 0.8391],
    [0.9901, 0.9905, 0.9928, 0.9944, 0.9818, 0.9785],
])

