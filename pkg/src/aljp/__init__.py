"""Arabic legal judgment prediction toolkit.

End-to-end pieces for predicting personal-status case outcomes from Arabic
court text: corpus handling and a synthetic case generator, Arabic text
normalization, TF-IDF and word-embedding features, classical (SVM via SMO,
logistic regression) and recurrent (LSTM/BiLSTM) classifiers with manual
gradients, an evaluation/grid-search harness, and a small prediction
service with a command-line front end.
"""

__version__ = "0.1.0"
