"""Published SEM-vs-RSE PWWS figures (percent), one row per cell.

Columns: dataset, architecture, defense, before-attack accuracy,
after-attack accuracy, accuracy shift, reported attack-success rate.
"""

SEM_VS_RSE = [
    ("imdb", "lstm", "sem", 86.8, 77.3, 9.5, 10.94),
    ("imdb", "lstm", "rse", 87.0, 82.2, 4.8, 5.52),
    ("imdb", "bilstm", "sem", 87.6, 76.1, 11.5, 13.13),
    ("imdb", "bilstm", "rse", 86.5, 79.3, 7.2, 8.32),
    ("imdb", "word_cnn", "sem", 86.8, 71.1, 15.7, 18.09),
    ("imdb", "word_cnn", "rse", 87.8, 81.2, 6.6, 7.52),
    ("agnews", "lstm", "sem", 90.9, 85.0, 5.9, 6.49),
    ("agnews", "lstm", "rse", 92.9, 84.2, 8.7, 9.36),
    ("agnews", "bilstm", "sem", 90.1, 81.1, 9.0, 9.99),
    ("agnews", "bilstm", "rse", 94.1, 88.3, 5.8, 6.16),
    ("agnews", "word_cnn", "sem", 88.7, 67.6, 21.1, 23.79),
    ("agnews", "word_cnn", "rse", 94.8, 89.9, 4.9, 5.17),
    ("yahoo", "lstm", "sem", 69.0, 54.9, 14.1, 20.43),
    ("yahoo", "lstm", "rse", 72.1, 64.3, 7.8, 10.82),
    ("yahoo", "bilstm", "sem", 70.2, 57.2, 13.0, 18.52),
    ("yahoo", "bilstm", "rse", 71.8, 64.6, 7.2, 10.03),
    ("yahoo", "word_cnn", "sem", 65.8, 52.6, 13.2, 20.06),
    ("yahoo", "word_cnn", "rse", 70.1, 62.6, 7.5, 10.70),
]
