# MLP classifier, training objectives, optimizer and trainer
