version = '0.1.0'
author = 'lcsctc developers'
email = 'lcsctc@users.noreply.github.com'
